#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qslr/qmatrix.hpp"
#include "qslr/surrogates.hpp"

namespace qslr {

/// Proximal problem  argmin_X  sum_i phi(sqrt(sigma_i(X)^2 + eps^2)) +
/// (mu/2) ||anchor - X||_F^2, solved through the singular values of anchor.
struct ProxProblem {
    QMatrix anchor;
    double mu = 1.0;
    SurrogateSpec spec;
    double tol = 1e-10; // inner stopping threshold on ||sigma_k - sigma_{k-1}||
    int max_iters = 500;
};

struct ProxResult {
    QMatrix X;
    std::vector<double> sigma_in;  // singular values of the anchor
    std::vector<double> sigma_out; // singular values of the output
    bool converged = true;         // inner iteration hit tol within max_iters
    bool kept_anchor = false;      // output fell back to the anchor (descent tie)
    int iters = 0;
};

/// Componentwise objective sum_i phi_at(i, sqrt(s_i^2+eps^2)) +
/// (mu/2)||s - s_hat||^2 evaluated in sigma space.
double sigma_objective(std::span<const double> s, std::span<const double> s_hat,
                       double mu, const SurrogateSpec& spec);

struct CcpStats {
    int iters = 0;
    bool converged = true;
    /// Components that did not settle under the plain recursion and were
    /// resolved by the safeguarded stationary-point solve.
    int fallback_components = 0;
};

/// Linearized fixed-point iteration on the singular values: starting from
/// sigma = 0, repeat sigma <- max(sigma_hat - grad/mu, 0) with the smoothed
/// chain derivative of phi, until the update moves less than tol. Components
/// that oscillate instead of settling (the recursion is only locally stable)
/// are finished by an exact 1-D stationary-point search with the same fixed
/// points, keeping the lowest objective.
std::vector<double> sigma_ccp(std::span<const double> sigma_hat, double mu,
                              const SurrogateSpec& spec, double tol,
                              int max_iters, CcpStats* stats = nullptr);

/// Full spectral proximal map: QSVD of the anchor, sigma_ccp on the values,
/// reconstruction with the anchor's singular vectors. If the inner solution
/// ends up with a worse objective than keeping the anchor (possible with
/// aggressive surrogates), the anchor is returned unchanged.
ProxResult spectral_prox(const ProxProblem& p);

/// Brute-force scalar oracle: exhaustive grid minimization of
/// phi(sqrt(s^2+eps^2)) + (mu/2)(s-a)^2 over s in [0, a + 3/mu + 1].
double scalar_prox_oracle(double a, double mu, const SurrogateSpec& spec,
                          double grid_step);

} // namespace qslr
