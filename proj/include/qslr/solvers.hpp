#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qslr/errors.hpp"
#include "qslr/imaging.hpp"
#include "qslr/qmatrix.hpp"
#include "qslr/surrogates.hpp"
#include "qslr/transforms.hpp"

namespace qslr {

/// Huber threshold rule: three accuracy tiers (1, 1e-2, 1e-4 switched at
/// residuals 1e-2 and 1e-3), or a fixed value.
struct DeltaSchedule {
    bool three_tier = true;
    double initial = 1.0;

    double initial_value() const { return three_tier ? 1.0 : initial; }
    double value_for_residual(double eps) const {
        if (!three_tier) return initial;
        if (eps >= 1e-2) return 1.0;
        if (eps >= 1e-3) return 1e-2;
        return 1e-4;
    }
};

struct SolverConfig {
    double beta = 10.0;
    double beta1 = 0.0; // 0 inherits beta
    double beta2 = 0.0; // 0 inherits beta
    double mu = 1.1;    // must lie in (0,2)
    double lambda = 0.3;
    double tau = 30.0;  // data-term scale; image pixels are carried 0-255
    double L1 = 1.0;
    double L2 = 1.0;
    double eta = 1e-4;
    double eta_ccp = 1e-10;
    int max_outer = 0;       // 0 picks the per-problem default (500 / 1000)
    int ccp_max_iters = 500; // cap for the inner singular-value iteration
    DeltaSchedule delta;
    SurrogateSpec surrogate;
    TransformKind transform = TransformKind::QDCT;
    double r = 1.01;    // merit weight, > 1
    double kappa = 0.5; // in (0,1)
    double divergence_factor = 1e6;

    double effective_beta1() const { return beta1 > 0.0 ? beta1 : beta; }
    double effective_beta2() const { return beta2 > 0.0 ? beta2 : beta; }
    void validate() const;
};

struct TraceRow {
    int k = 0;
    double eps_k = 0.0;
    double gap1 = 0.0; // ||W(X)-W|| (denoise) or ||Z-W|| (inpaint)
    double gap2 = 0.0; // inpaint only: ||P(W#(W)) - P(Y)||
    double objective = 0.0;
    double merit = 0.0;
    double dX = 0.0;
    double dW = 0.0;
    double dLambda1 = 0.0;
    double dLambda2 = 0.0;
    double wall_ms = 0.0;
};

struct IterationTrace {
    std::vector<TraceRow> rows;

    void write_csv(std::ostream& os) const;
    void write_csv(const std::string& path) const;
    static IterationTrace read_csv(const std::string& path);
    /// Zero the wall_ms column (deterministic output mode).
    void strip_timing();
};

/// Divergence carries the trace collected so far.
class DivergenceError : public NumericalError {
public:
    DivergenceError(const std::string& msg, IterationTrace t)
        : NumericalError(msg), trace(std::move(t)) {}
    IterationTrace trace;
};

/// Constants entering the descent analysis and the merit functions, computed
/// from a config with the operator identifications of the image problems
/// (B = -I, C = W for denoising; C1 = I, B1 = -I, B2 = P W# for inpainting).
struct AssumptionConstants {
    double rho_mu = 0.0;       // 1 - |1 - mu|
    double lambda_plus = 1.0;  // smallest positive eigenvalue of B#B
    double L_g = 0.0;          // lambda/delta (used in the arithmetic)
    double L_g_unit = 0.0;     // 1/delta (reported alongside)
    double q1 = 0.0, q1_inf = 0.0, q2 = 0.0, q2_inf = 0.0;
    double r = 1.0, kappa = 0.5;
    // denoise family
    double varsigma0 = 0.0, varsigma1 = 0.0, varsigma2 = 0.0;
    double varsigma3 = 0.0, varsigma4 = 0.0, varsigma5 = 0.0;
    double a1 = 0.0, a2 = 0.0; // achieved margins
    double pi = 0.0;           // subgradient bound factor
    // inpainting family
    double Lf = 0.0;
    bool Lf_is_estimate = false;
    double lambda_plus_C1 = 1.0, lambda_plus_B2 = 1.0;
    double lambda_min_B2 = 0.0; // 0 for a partial mask
    double norm_B1 = 1.0, norm_C1 = 1.0;
    double theta11 = 0.0, theta12 = 0.0, theta21 = 0.0, theta22 = 0.0;
    double theta1 = 0.0, theta2 = 0.0;
    double theta13 = 0.0, theta23 = 0.0, theta24 = 0.0, theta25 = 0.0;
    double theta3 = 0.0, theta4 = 0.0, theta5 = 0.0;
    double theta30 = 0.0, theta40 = 0.0;
};

struct InequalityCheck {
    std::string name;
    std::string description;
    double margin = 0.0; // lhs - rhs; pass means margin > 0
    bool pass = false;
};

struct AssumptionReport {
    AssumptionConstants constants;
    std::vector<InequalityCheck> checks;
    std::vector<std::string> notes;
    bool all_pass = false;

    void print(std::ostream& os) const;
};

AssumptionConstants compute_constants_denoise(const SolverConfig& cfg);
AssumptionConstants compute_constants_inpaint(
    const SolverConfig& cfg, double observed_fraction,
    std::optional<double> Lf_override = std::nullopt);

AssumptionReport check_assumption_1(const SolverConfig& cfg);
AssumptionReport check_assumption_2(
    const SolverConfig& cfg, double observed_fraction,
    std::optional<double> Lf_override = std::nullopt);

/// Numeric bound on the Lipschitz constant of the smoothed spectral
/// penalty's scalar derivative (an estimate, reported as such).
double estimate_Lf(const SurrogateSpec& spec);

// --- Denoising (full observation, identity forward operator) ---

struct DenoiseState {
    QMatrix X, W, Lambda;
    QMatrix X_prev, W_prev, Lambda_prev;
    QMatrix WX; // W(X) for the current X
    int k = 0;  // completed outer iterations
};

/// ||dX|| + ||dW|| + ||W(X) - W||.
double residual(const DenoiseState& s);
/// (||W(X) - W||, 0).
std::pair<double, double> primal_gaps(const DenoiseState& s);

/// Augmented Lagrangian of the denoising model at (X, W, Lambda). The
/// spectral term needs sigma(X); pass it when already known to avoid a QSVD.
double lagrangian_denoise(const QMatrix& X, const QMatrix& W,
                          const QMatrix& Lambda, const QMatrix& Y,
                          const SolverConfig& cfg, const OrthoTransform& T,
                          const std::vector<double>* sigma_X = nullptr);

/// Lagrangian plus r*varsigma0 ||dW||^2 + r*varsigma2 ||B# dLambda||^2.
double merit_R(const DenoiseState& s, const QMatrix& Y, const SolverConfig& cfg,
               const OrthoTransform& T, const AssumptionConstants& c,
               const std::vector<double>* sigma_X = nullptr);

struct DenoiseIterExtras {
    const QMatrix& anchor;
    double mu_eff = 0.0;
    const std::vector<double>& sigma_anchor;
    const std::vector<double>& sigma_out;
    double delta = 0.0; // Huber threshold used by this W-step
    double eps_k = 0.0;
    double objective = 0.0;
    double merit = 0.0;
};

using DenoiseCallback =
    std::function<void(const DenoiseState&, const DenoiseIterExtras&)>;

struct DenoiseResult {
    QMatrix X;
    IterationTrace trace;
    bool converged = false;
    int iters = 0;
};

DenoiseResult pl_admm_denoise(const QMatrix& Y, const SolverConfig& cfg,
                              const DenoiseCallback& callback = nullptr);

// --- Inpainting (noise-free constrained model) ---

struct InpaintState {
    QMatrix Z, W, Lambda1, Lambda2;
    QMatrix Z_prev, W_prev, Lambda1_prev, Lambda2_prev;
    QMatrix obs_residual; // P(W#(W)) - P(Y)
    // Norms of the k-1 level differences (merit_T looks two levels back).
    double dZ_prev_norm = 0.0;
    double dW_prev_norm = 0.0;
    double dLambda1_prev_norm = 0.0;
    int k = 0;
};

/// ||Z - W|| + ||P(W#(W)) - P(Y)||.
double residual(const InpaintState& s);
/// (||Z - W||, ||P(W#(W)) - P(Y)||).
std::pair<double, double> primal_gaps(const InpaintState& s);

double lagrangian_inpaint(const QMatrix& Z, const QMatrix& W,
                          const QMatrix& Lambda1, const QMatrix& Lambda2,
                          const QMatrix& Y, const ObservationMask& mask,
                          const SolverConfig& cfg, const OrthoTransform& T,
                          const std::vector<double>* sigma_Z = nullptr);

/// Two-level-history merit built on the inpainting Lagrangian. Rows with
/// k < 2 treat the missing older differences as zero.
double merit_T(const InpaintState& s, const QMatrix& Y,
               const ObservationMask& mask, const SolverConfig& cfg,
               const OrthoTransform& T, const AssumptionConstants& c,
               const std::vector<double>* sigma_Z = nullptr);

struct InpaintIterExtras {
    const QMatrix& anchor;
    double mu_eff = 0.0;
    const std::vector<double>& sigma_anchor;
    const std::vector<double>& sigma_out;
    double delta = 0.0;
    double eps_k = 0.0;
    double objective = 0.0;
    double merit = 0.0;
};

using InpaintCallback =
    std::function<void(const InpaintState&, const InpaintIterExtras&)>;

struct InpaintResult {
    QMatrix Z;
    QMatrix X; // W#(Z)
    IterationTrace trace;
    bool converged = false;
    int iters = 0;
};

InpaintResult pl_admm_nf_inpaint(const QMatrix& Y, const ObservationMask& mask,
                                 const SolverConfig& cfg,
                                 const InpaintCallback& callback = nullptr);

} // namespace qslr
