#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "qslr/qmatrix.hpp"

namespace qslr {

/// Scalar surrogates phi(x, gamma) replacing the rank function:
///   Nuclear                 x
///   LogDet                  log(1 + x^2)
///   SchattenGamma           x^gamma
///   Logarithm               log(gamma + x)
///   Laplace                 1 - exp(-x/gamma)
///   WeightedSchattenGamma   w_i * x^gamma
///   Etp                     s * (1 - exp(-gamma x)) / (1 - exp(-gamma))
enum class SurrogateKind {
    Nuclear,
    LogDet,
    SchattenGamma,
    Logarithm,
    Laplace,
    WeightedSchattenGamma,
    Etp,
};

SurrogateKind surrogate_kind_from_string(const std::string& s);
std::string to_string(SurrogateKind k);

struct SurrogateSpec {
    SurrogateKind kind = SurrogateKind::Nuclear;
    double gamma = 0.5;
    /// Smoothing added under the square root of the spectral penalty.
    double epsilon = 0.0;
    /// Internal scale of the Etp formula; distinct from the model's sparsity
    /// weight lambda.
    double etp_scale = 1.0;
    /// Per-index weights for WeightedSchattenGamma (length min(m,n)).
    std::vector<double> weights;
    /// If > 0, the solver refreshes weights each outer iteration as
    /// scale / (sigma_i(previous iterate) + 1e-4).
    double adaptive_weight_scale = 0.0;

    bool is_weighted() const { return kind == SurrogateKind::WeightedSchattenGamma; }
    void validate() const;
};

/// phi at x >= 0 for the unweighted kinds; throws ConfigError for the
/// weighted kind (use phi_at).
double phi(double x, const SurrogateSpec& spec);

/// phi with the index-bound weight applied (weighted kind only looks at i).
double phi_at(std::size_t i, double x, const SurrogateSpec& spec);

/// Analytic derivative d phi / dx; singular at 0 for SchattenGamma with
/// gamma < 1.
double dphi(double x, const SurrogateSpec& spec);
double dphi_at(std::size_t i, double x, const SurrogateSpec& spec);

/// Smoothed chain derivative d/ds phi(sqrt(s^2 + eps^2)) at s >= 0.
double dphi_smoothed_at(std::size_t i, double s, const SurrogateSpec& spec);

/// Sum_i phi_at(i, sqrt(sigma_i^2 + eps^2)).
double spectral_penalty(std::span<const double> sigma, const SurrogateSpec& spec);

/// True when phi is unbounded as x -> inf (the coercivity used by the
/// descent analysis); Laplace and Etp saturate.
bool surrogate_coercive(SurrogateKind k);

struct HuberSpec {
    double delta = 1.0;  // threshold, > 0
    double lambda = 0.0; // model sparsity weight, >= 0
    void validate() const;
};

/// Entrywise Huber on the quaternion modulus:
/// value = sum_ij h(|W_ij|) with h(t) = t^2/(2 delta) for t < delta,
/// t - delta/2 otherwise. Unweighted (the model multiplies by lambda).
double huber(const QMatrix& W, const HuberSpec& spec);

/// Gradient of huber() with respect to the four real component planes:
/// entry q maps to q/delta on the quadratic branch and q/|q| on the linear
/// branch (zero at q = 0).
QMatrix huber_grad(const QMatrix& W, const HuberSpec& spec);

/// Fused value+gradient (one pass over the planes).
double huber_value_grad(const QMatrix& W, const HuberSpec& spec, QMatrix& grad);

} // namespace qslr
