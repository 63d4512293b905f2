#include "qslr/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "qslr/kernels.hpp"
#include "qslr/prox.hpp"
#include "qslr/qsvd.hpp"

namespace qslr {

void SolverConfig::validate() const {
    if (!(mu > 0.0 && mu < 2.0)) throw ConfigError("solver: mu must lie in (0,2)");
    if (beta <= 0.0) throw ConfigError("solver: beta must be > 0");
    if (beta1 < 0.0 || beta2 < 0.0)
        throw ConfigError("solver: beta1/beta2 must be >= 0 (0 inherits beta)");
    if (lambda < 0.0) throw ConfigError("solver: lambda must be >= 0");
    if (L1 <= 0.0 || L2 <= 0.0) throw ConfigError("solver: L1, L2 must be > 0");
    if (eta <= 0.0) throw ConfigError("solver: eta must be > 0");
    if (eta_ccp <= 0.0) throw ConfigError("solver: eta_ccp must be > 0");
    if (max_outer < 0) throw ConfigError("solver: max_outer must be >= 0");
    if (ccp_max_iters <= 0) throw ConfigError("solver: ccp_max_iters must be > 0");
    if (delta.initial <= 0.0) throw ConfigError("solver: delta must be > 0");
    if (!(r > 1.0)) throw ConfigError("solver: r must be > 1");
    if (!(kappa > 0.0 && kappa < 1.0))
        throw ConfigError("solver: kappa must lie in (0,1)");
    surrogate.validate();
}

namespace {

void append_csv_row(std::ostream& os, const TraceRow& r) {
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  r.k, r.eps_k, r.gap1, r.gap2, r.objective, r.merit, r.dX, r.dW,
                  r.dLambda1, r.dLambda2, r.wall_ms);
    os << buf;
}

} // namespace

void IterationTrace::write_csv(std::ostream& os) const {
    os << "k,eps_k,gap1,gap2,objective,merit,dX,dW,dLambda1,dLambda2,wall_ms\n";
    for (const auto& r : rows) append_csv_row(os, r);
}

void IterationTrace::write_csv(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw IoError("trace: cannot open " + path);
    write_csv(os);
    if (!os) throw IoError("trace: write failure: " + path);
}

IterationTrace IterationTrace::read_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("trace: cannot open " + path);
    std::string line;
    if (!std::getline(is, line)) throw IoError("trace: empty file: " + path);
    IterationTrace trace;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        TraceRow r;
        std::istringstream ls(line);
        char comma;
        ls >> r.k >> comma >> r.eps_k >> comma >> r.gap1 >> comma >> r.gap2 >>
            comma >> r.objective >> comma >> r.merit >> comma >> r.dX >> comma >>
            r.dW >> comma >> r.dLambda1 >> comma >> r.dLambda2 >> comma >>
            r.wall_ms;
        if (ls.fail()) throw IoError("trace: malformed row in " + path);
        trace.rows.push_back(r);
    }
    return trace;
}

void IterationTrace::strip_timing() {
    for (auto& r : rows) r.wall_ms = 0.0;
}

AssumptionConstants compute_constants_denoise(const SolverConfig& cfg) {
    AssumptionConstants c;
    c.rho_mu = 1.0 - std::abs(1.0 - cfg.mu);
    c.lambda_plus = 1.0; // B = -I
    const double delta0 = cfg.delta.initial_value();
    c.L_g = cfg.lambda / delta0;
    c.L_g_unit = 1.0 / delta0;
    c.q1 = c.q1_inf = cfg.L1;
    c.q2 = c.q2_inf = cfg.L2;
    c.r = cfg.r;
    c.kappa = cfg.kappa;
    const double beta = cfg.beta;
    const double rho2 = c.rho_mu * c.rho_mu;
    const double abs1mu = std::abs(1.0 - cfg.mu);
    c.varsigma0 =
        2.0 * cfg.mu * (c.q2 + c.L_g) * (c.q2 + c.L_g) / (beta * c.lambda_plus * rho2);
    c.varsigma1 = 2.0 * cfg.mu * c.q2 * c.q2 / (beta * c.lambda_plus * rho2);
    c.varsigma2 = abs1mu / (beta * cfg.mu * c.lambda_plus * c.rho_mu);
    c.varsigma3 = 1.0 / (beta * c.rho_mu * c.lambda_plus);
    c.varsigma4 = (c.q2 + c.L_g) * (c.q2 + c.L_g) / (beta * c.rho_mu * c.lambda_plus);
    c.varsigma5 = abs1mu / (2.0 * beta * cfg.mu * cfg.mu * c.lambda_plus);
    c.a1 = c.q1_inf;
    c.a2 = c.q2_inf + beta -
           (cfg.r * c.varsigma0 + cfg.r * c.varsigma1 + c.L_g);
    // ||C|| = ||W|| = 1 and ||B|| = 1 for the image model.
    c.pi = std::max({c.q1, beta + c.q2 + c.L_g, 2.0 + 1.0 / (beta * cfg.mu)});
    return c;
}

double estimate_Lf(const SurrogateSpec& spec) {
    // Slope bound of s -> d/ds phi(sqrt(s^2+eps^2)) over a dense grid. The
    // curvature concentrates near the origin (s of order eps), so the grid
    // mixes a fine linear part with a log sweep.
    SurrogateSpec probe = spec;
    if (probe.is_weighted()) {
        probe.kind = SurrogateKind::SchattenGamma; // unit weight stand-in
        probe.weights.clear();
    }
    std::vector<double> grid;
    const double eps = std::max(probe.epsilon, 1e-6);
    for (int i = 0; i <= 400; ++i) grid.push_back(10.0 * eps * i / 400.0);
    for (int i = 0; i <= 200; ++i)
        grid.push_back(std::pow(10.0, -6.0 + 10.0 * i / 200.0));
    std::sort(grid.begin(), grid.end());
    double max_slope = 0.0;
    double prev_s = grid[0];
    double prev_d = dphi_smoothed_at(0, prev_s, probe);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double s = grid[i];
        if (s <= prev_s) continue;
        const double d = dphi_smoothed_at(0, s, probe);
        max_slope = std::max(max_slope, std::abs(d - prev_d) / (s - prev_s));
        prev_s = s;
        prev_d = d;
    }
    return max_slope;
}

AssumptionConstants compute_constants_inpaint(const SolverConfig& cfg,
                                              double observed_fraction,
                                              std::optional<double> Lf_override) {
    AssumptionConstants c = compute_constants_denoise(cfg);
    const double beta1 = cfg.effective_beta1();
    const double beta2 = cfg.effective_beta2();
    const double mu = cfg.mu;
    const double rho = c.rho_mu;
    const double abs1mu = std::abs(1.0 - mu);
    // Operator identifications: C1 = I, B1 = -I, B2 = P_Omega W#. The
    // positive spectrum of B2#B2 is {1}; for a partial mask the operator is
    // rank deficient, so its smallest eigenvalue over the whole space is 0.
    c.lambda_plus_C1 = 1.0;
    c.lambda_plus_B2 = 1.0;
    c.lambda_min_B2 = observed_fraction >= 1.0 ? 1.0 : 0.0;
    c.norm_B1 = 1.0;
    c.norm_C1 = 1.0;
    if (Lf_override) {
        c.Lf = *Lf_override;
        c.Lf_is_estimate = false;
    } else {
        c.Lf = estimate_Lf(cfg.surrogate);
        c.Lf_is_estimate = true;
    }

    const double rho2 = rho * rho;
    const double rho3 = rho2 * rho;
    const double rho4 = rho2 * rho2;
    const double B1sq = c.norm_B1 * c.norm_B1;
    const double C1sq = c.norm_C1 * c.norm_C1;

    c.theta11 = 4.0 * (c.q1 + c.Lf) * (c.q1 + c.Lf) * mu /
                (rho2 * beta1 * c.lambda_plus_C1);
    c.theta12 = 4.0 * beta1 * B1sq * C1sq / (rho * c.lambda_plus_C1);
    c.theta21 = 3.0 * mu * B1sq *
                (4.0 * c.q1 * c.q1 +
                 abs1mu * abs1mu * 4.0 * (c.q1 + c.Lf) * (c.q1 + c.Lf)) /
                (beta2 * rho4 * c.lambda_plus_C1 * c.lambda_plus_B2);
    c.theta22 = 6.0 * (c.L_g + c.q2) * (c.L_g + c.q2) * mu /
                    (beta2 * rho2 * c.lambda_plus_B2) +
                3.0 * mu * B1sq * (abs1mu * abs1mu + 1.0) *
                    (4.0 * beta1 * beta1 * B1sq * C1sq) /
                    (beta2 * rho4 * c.lambda_plus_C1 * c.lambda_plus_B2);
    c.theta1 = c.theta11 + c.theta21;
    c.theta2 = c.theta12 + c.theta22;

    c.theta13 = abs1mu / (beta1 * mu * c.lambda_plus_C1 * rho);
    c.theta23 = 3.0 * abs1mu * B1sq /
                (beta2 * rho3 * mu * c.lambda_plus_B2 * c.lambda_plus_C1);
    c.theta24 = 3.0 * abs1mu * abs1mu * abs1mu * B1sq /
                (beta2 * rho3 * mu * c.lambda_plus_B2 * c.lambda_plus_C1);
    c.theta25 = abs1mu / (beta2 * rho * mu * c.lambda_plus_B2);
    c.theta3 = c.theta13 + c.theta23;
    c.theta4 = c.theta24;
    c.theta5 = c.theta25;

    c.theta30 = 3.0 / (2.0 * beta1 * rho * c.lambda_plus_C1);
    c.theta40 = std::max(3.0 / (2.0 * beta2 * rho * c.lambda_plus_B2),
                         3.0 * B1sq / (2.0 * beta2 * rho2 * c.lambda_plus_B2 *
                                       c.lambda_plus_C1));
    return c;
}

namespace {

InequalityCheck make_check(const std::string& name,
                           const std::string& description, double margin) {
    InequalityCheck ic;
    ic.name = name;
    ic.description = description;
    ic.margin = margin;
    ic.pass = margin > 0.0;
    return ic;
}

} // namespace

AssumptionReport check_assumption_1(const SolverConfig& cfg) {
    AssumptionReport rep;
    rep.constants = compute_constants_denoise(cfg);
    const AssumptionConstants& c = rep.constants;
    rep.checks.push_back(
        make_check("A4.a", "inf_k L_{k,1} must admit a positive a1", c.q1_inf));
    rep.checks.push_back(make_check(
        "A4.b",
        "q2^- + beta*lmin(B#B) - (r*vs0 + r*vs1 + L_g) must be positive",
        c.q2_inf + cfg.beta - (c.r * c.varsigma0 + c.r * c.varsigma1 + c.L_g)));
    rep.checks.push_back(make_check(
        "A5", "beta > 2 L_g / (kappa * lambda_plus * rho(mu))",
        cfg.beta - 2.0 * c.L_g / (c.kappa * c.lambda_plus * c.rho_mu)));
    if (!surrogate_coercive(cfg.surrogate.kind))
        rep.notes.push_back("A1: surrogate " + to_string(cfg.surrogate.kind) +
                            " saturates (not coercive); the boundedness "
                            "argument leans on the data term instead");
    rep.notes.push_back("L_g uses lambda/delta = " + std::to_string(c.L_g) +
                        "; the bare Huber constant 1/delta = " +
                        std::to_string(c.L_g_unit));
    if (cfg.delta.three_tier)
        rep.notes.push_back(
            "three-tier delta schedule active: L_g grows by 1e2/1e4 in the "
            "later tiers; margins above use the initial tier");
    rep.all_pass = true;
    for (const auto& ic : rep.checks) rep.all_pass = rep.all_pass && ic.pass;
    return rep;
}

AssumptionReport check_assumption_2(const SolverConfig& cfg,
                                    double observed_fraction,
                                    std::optional<double> Lf_override) {
    AssumptionReport rep;
    rep.constants =
        compute_constants_inpaint(cfg, observed_fraction, Lf_override);
    const AssumptionConstants& c = rep.constants;
    const double beta1 = cfg.effective_beta1();
    const double beta2 = cfg.effective_beta2();
    rep.checks.push_back(make_check("B4.a", "q1^- - 3 r theta1 must be positive",
                                    c.q1_inf - 3.0 * c.r * c.theta1));
    rep.checks.push_back(make_check(
        "B4.b",
        "q2^- + beta2*lmin(B2#B2) + beta1*lmin(B1#B1) - (3 r theta2 + L_g)",
        c.q2_inf + beta2 * c.lambda_plus_B2 + beta1 -
            (3.0 * c.r * c.theta2 + c.L_g)));
    rep.checks.push_back(make_check("B5.a",
                                    "kappa/(2 L_f) > theta_{3,0} + theta_{4,0}",
                                    c.kappa / (2.0 * c.Lf) -
                                        (c.theta30 + c.theta40)));
    const double b5b_margin =
        c.L_g > 0.0 ? 1.0 / (2.0 * c.L_g) - c.theta40
                    : std::numeric_limits<double>::infinity();
    rep.checks.push_back(
        make_check("B5.b", "1/(2 L_g) > theta_{4,0}", b5b_margin));
    if (observed_fraction < 1.0)
        rep.notes.push_back(
            "B2: B2#B2 is rank deficient for a partial mask (observed fraction " +
            std::to_string(observed_fraction) +
            "); lambda_plus is taken as 1 on the observed subspace and B4.b "
            "uses that value, which overstates the guarantee off-subspace");
    if (c.Lf_is_estimate)
        rep.notes.push_back("L_f = " + std::to_string(c.Lf) +
                            " is a numerical estimate of the smoothed spectral "
                            "penalty's gradient Lipschitz constant");
    rep.all_pass = true;
    for (const auto& ic : rep.checks) rep.all_pass = rep.all_pass && ic.pass;
    return rep;
}

void AssumptionReport::print(std::ostream& os) const {
    for (const auto& ic : checks) {
        char buf[256];
        std::snprintf(buf, sizeof(buf), "%-5s %-4s margin=%+.6g  (%s)\n",
                      ic.name.c_str(), ic.pass ? "PASS" : "FAIL", ic.margin,
                      ic.description.c_str());
        os << buf;
    }
    for (const auto& n : notes) os << "note: " << n << "\n";
    os << (all_pass ? "all inequalities hold\n" : "some inequalities fail\n");
}

// --- shared helpers ---

namespace {

double norm_diff(const QMatrix& a, const QMatrix& b) {
    return std::sqrt(kernels::ssd(a.data(), b.data(), a.total()));
}

std::vector<double> sorted_desc(std::vector<double> v) {
    std::sort(v.begin(), v.end(), std::greater<double>());
    return v;
}

void refresh_adaptive_weights(SurrogateSpec& spec,
                              const std::vector<double>& sigma_prev) {
    if (spec.adaptive_weight_scale <= 0.0) return;
    spec.weights.resize(sigma_prev.size());
    for (std::size_t i = 0; i < sigma_prev.size(); ++i)
        spec.weights[i] = spec.adaptive_weight_scale / (sigma_prev[i] + 1e-4);
}

double finite_or_throw(double v, const char* what, IterationTrace& trace) {
    if (!std::isfinite(v))
        throw DivergenceError(std::string("solver diverged: non-finite ") + what,
                              std::move(trace));
    return v;
}

} // namespace

double residual(const DenoiseState& s) {
    return norm_diff(s.X, s.X_prev) + norm_diff(s.W, s.W_prev) +
           norm_diff(s.WX, s.W);
}

std::pair<double, double> primal_gaps(const DenoiseState& s) {
    return {norm_diff(s.WX, s.W), 0.0};
}

double lagrangian_denoise(const QMatrix& X, const QMatrix& W,
                          const QMatrix& Lambda, const QMatrix& Y,
                          const SolverConfig& cfg, const OrthoTransform& T,
                          const std::vector<double>* sigma_X) {
    std::vector<double> sigma;
    if (!sigma_X) {
        sigma = qsvd_values(X);
        sigma_X = &sigma;
    }
    const HuberSpec hs{cfg.delta.initial_value(), cfg.lambda};
    const QMatrix C = T.forward(X) - W;
    const double data = kernels::ssd(X.data(), Y.data(), X.total());
    return spectral_penalty(*sigma_X, cfg.surrogate) + cfg.lambda * huber(W, hs) +
           data / (2.0 * cfg.tau * cfg.tau) + inner(Lambda, C) +
           0.5 * cfg.beta * frobenius_norm_sq(C);
}

double merit_R(const DenoiseState& s, const QMatrix& Y, const SolverConfig& cfg,
               const OrthoTransform& T, const AssumptionConstants& c,
               const std::vector<double>* sigma_X) {
    const double dW = norm_diff(s.W, s.W_prev);
    const double dL = norm_diff(s.Lambda, s.Lambda_prev); // B = -I
    return lagrangian_denoise(s.X, s.W, s.Lambda, Y, cfg, T, sigma_X) +
           c.r * c.varsigma0 * dW * dW + c.r * c.varsigma2 * dL * dL;
}

double residual(const InpaintState& s) {
    return norm_diff(s.Z, s.W) + frobenius_norm(s.obs_residual);
}

std::pair<double, double> primal_gaps(const InpaintState& s) {
    return {norm_diff(s.Z, s.W), frobenius_norm(s.obs_residual)};
}

double lagrangian_inpaint(const QMatrix& Z, const QMatrix& W,
                          const QMatrix& Lambda1, const QMatrix& Lambda2,
                          const QMatrix& Y, const ObservationMask& mask,
                          const SolverConfig& cfg, const OrthoTransform& T,
                          const std::vector<double>* sigma_Z) {
    std::vector<double> sigma;
    if (!sigma_Z) {
        sigma = qsvd_values(Z);
        sigma_Z = &sigma;
    }
    const HuberSpec hs{cfg.delta.initial_value(), cfg.lambda};
    const QMatrix C1 = Z - W;
    const QMatrix g2 = apply_mask(T.adjoint(W) - Y, mask);
    const double beta1 = cfg.effective_beta1();
    const double beta2 = cfg.effective_beta2();
    return spectral_penalty(*sigma_Z, cfg.surrogate) + cfg.lambda * huber(W, hs) +
           inner(Lambda1, C1) + 0.5 * beta1 * frobenius_norm_sq(C1) +
           inner(Lambda2, g2) + 0.5 * beta2 * frobenius_norm_sq(g2);
}

double merit_T(const InpaintState& s, const QMatrix& Y,
               const ObservationMask& mask, const SolverConfig& cfg,
               const OrthoTransform& T, const AssumptionConstants& c,
               const std::vector<double>* sigma_Z) {
    const double dZ = norm_diff(s.Z, s.Z_prev);
    const double dW = norm_diff(s.W, s.W_prev);
    const double dL1 = norm_diff(s.Lambda1, s.Lambda1_prev); // C1 = I
    // B2# = W P_Omega and Lambda2 lives on the observed set, so the weighted
    // multiplier difference norm is the plain one.
    const double dL2 = norm_diff(s.Lambda2, s.Lambda2_prev);
    return lagrangian_inpaint(s.Z, s.W, s.Lambda1, s.Lambda2, Y, mask, cfg, T,
                              sigma_Z) +
           2.0 * c.r * c.theta1 * dZ * dZ +
           c.r * c.theta1 * s.dZ_prev_norm * s.dZ_prev_norm +
           2.0 * c.r * c.theta2 * dW * dW +
           c.r * c.theta2 * s.dW_prev_norm * s.dW_prev_norm +
           c.r * c.theta3 * dL1 * dL1 +
           c.r * c.theta4 * s.dLambda1_prev_norm * s.dLambda1_prev_norm +
           c.r * c.theta5 * dL2 * dL2;
}

// --- PL-ADMM for the denoising model ---

DenoiseResult pl_admm_denoise(const QMatrix& Y, const SolverConfig& cfg,
                              const DenoiseCallback& callback) {
    cfg.validate();
    if (Y.empty()) throw ShapeError("pl_admm_denoise: empty input");
    if (cfg.tau <= 0.0) throw ConfigError("pl_admm_denoise: tau must be > 0");
    if (cfg.surrogate.is_weighted() && cfg.surrogate.adaptive_weight_scale <= 0.0 &&
        cfg.surrogate.weights.size() != std::min(Y.rows(), Y.cols()))
        throw ConfigError("pl_admm_denoise: weight vector length must be min(m,n)");

    const OrthoTransform T(cfg.transform, Y.rows(), Y.cols());
    const double beta = cfg.beta;
    const double mu = cfg.mu;
    const double tau2 = cfg.tau * cfg.tau;
    const double mu_eff = beta + cfg.L1 + 1.0 / tau2;
    const int max_outer = cfg.max_outer > 0 ? cfg.max_outer : 500;
    const double y_norm = frobenius_norm(Y);
    const double diverge_bound = cfg.divergence_factor * std::max(y_norm, 1.0);
    const AssumptionConstants consts = compute_constants_denoise(cfg);

    DenoiseState s;
    s.X = Y;
    s.W = QMatrix::zeros(Y.rows(), Y.cols());
    s.Lambda = QMatrix::zeros(Y.rows(), Y.cols());
    s.WX = T.forward(s.X);
    s.X_prev = s.X;
    s.W_prev = s.W;
    s.Lambda_prev = s.Lambda;

    SurrogateSpec surr = cfg.surrogate;
    std::vector<double> sigma_prev;
    if (surr.adaptive_weight_scale > 0.0) sigma_prev = qsvd_values(Y);

    double delta = cfg.delta.initial_value();
    IterationTrace trace;
    DenoiseResult result;

    for (int k = 0; k < max_outer; ++k) {
        const auto t0 = std::chrono::steady_clock::now();
        refresh_adaptive_weights(surr, sigma_prev);

        // X-step: single quadratic around the combined anchor, then the
        // spectral proximal map with mu_eff = beta + L1 + 1/tau^2.
        QMatrix anchor = T.adjoint(lincomb(1.0, s.W, -1.0 / beta, s.Lambda));
        kernels::axpby(beta / mu_eff, anchor.data(), cfg.L1 / mu_eff,
                       s.X.data(), anchor.data(), anchor.total());
        kernels::axpy(1.0 / (tau2 * mu_eff), Y.data(), anchor.data(),
                      anchor.total());
        ProxProblem pp{std::move(anchor), mu_eff, surr, cfg.eta_ccp,
                       cfg.ccp_max_iters};
        ProxResult pr = spectral_prox(pp);

        s.X_prev = std::move(s.X);
        s.X = std::move(pr.X);
        s.WX = T.forward(s.X);

        // W-step: closed form with the Huber gradient linearized at W_k.
        const HuberSpec hs{delta, cfg.lambda};
        const QMatrix grad = huber_grad(s.W, hs);
        s.W_prev = std::move(s.W);
        QMatrix Wn = lincomb(beta / (beta + cfg.L2), s.WX, 1.0 / (beta + cfg.L2),
                             s.Lambda);
        kernels::axpy(cfg.L2 / (beta + cfg.L2), s.W_prev.data(), Wn.data(),
                      Wn.total());
        kernels::axpy(-cfg.lambda / (beta + cfg.L2), grad.data(), Wn.data(),
                      Wn.total());
        s.W = std::move(Wn);

        // Multiplier step.
        s.Lambda_prev = s.Lambda;
        const QMatrix C = lincomb(1.0, s.WX, -1.0, s.W);
        kernels::axpy(mu * beta, C.data(), s.Lambda.data(), s.Lambda.total());
        s.k = k + 1;

        const double dX = norm_diff(s.X, s.X_prev);
        const double dW = norm_diff(s.W, s.W_prev);
        const double dL = norm_diff(s.Lambda, s.Lambda_prev);
        const double gap1 = frobenius_norm(C);
        const double eps = dX + dW + gap1;

        const std::vector<double> sigma_now = sorted_desc(pr.sigma_out);
        const double data = kernels::ssd(s.X.data(), Y.data(), s.X.total());
        const double objective = spectral_penalty(sigma_now, surr) +
                                 cfg.lambda * huber(s.W, hs) +
                                 data / (2.0 * tau2);
        const double lagr = objective + inner(s.Lambda, C) +
                            0.5 * beta * gap1 * gap1;
        const double merit = lagr + consts.r * consts.varsigma0 * dW * dW +
                             consts.r * consts.varsigma2 * dL * dL;

        TraceRow row;
        row.k = s.k;
        row.eps_k = eps;
        row.gap1 = gap1;
        row.objective = objective;
        row.merit = merit;
        row.dX = dX;
        row.dW = dW;
        row.dLambda1 = dL;
        row.wall_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
        trace.rows.push_back(row);

        finite_or_throw(eps, "residual", trace);
        if (frobenius_norm(s.X) > diverge_bound)
            throw DivergenceError("pl_admm_denoise: iterate norm exceeded " +
                                      std::to_string(cfg.divergence_factor) +
                                      " * ||Y||",
                                  std::move(trace));

        if (callback) {
            DenoiseIterExtras extras{pp.anchor, mu_eff,  pr.sigma_in,
                                     pr.sigma_out, delta, eps,
                                     objective,    merit};
            callback(s, extras);
        }

        sigma_prev = sigma_now;
        delta = cfg.delta.value_for_residual(eps);

        if (eps < cfg.eta) {
            result.converged = true;
            break;
        }
    }

    result.X = std::move(s.X);
    result.iters = s.k;
    result.trace = std::move(trace);
    return result;
}

// --- PL-ADMM-NF for the constrained (noise-free) model ---

InpaintResult pl_admm_nf_inpaint(const QMatrix& Y, const ObservationMask& mask,
                                 const SolverConfig& cfg,
                                 const InpaintCallback& callback) {
    cfg.validate();
    if (Y.empty()) throw ShapeError("pl_admm_nf_inpaint: empty input");
    if (Y.rows() != mask.rows || Y.cols() != mask.cols)
        throw ShapeError("pl_admm_nf_inpaint: mask/image shape mismatch");
    if (mask.observed_fraction() <= 0.0)
        throw ConfigError("pl_admm_nf_inpaint: mask observes no pixels");
    if (cfg.surrogate.is_weighted() && cfg.surrogate.adaptive_weight_scale <= 0.0 &&
        cfg.surrogate.weights.size() != std::min(Y.rows(), Y.cols()))
        throw ConfigError("pl_admm_nf_inpaint: weight vector length must be min(m,n)");

    const OrthoTransform T(cfg.transform, Y.rows(), Y.cols());
    const double beta1 = cfg.effective_beta1();
    const double beta2 = cfg.effective_beta2();
    const double mu = cfg.mu;
    const double mu_eff = beta1 + cfg.L1;
    const int max_outer = cfg.max_outer > 0 ? cfg.max_outer : 1000;
    const std::vector<double> mask_plane = mask.as_plane();
    const QMatrix PY = apply_mask(Y, mask);
    const double y_norm = frobenius_norm(Y);
    const double diverge_bound = cfg.divergence_factor * std::max(y_norm, 1.0);
    const AssumptionConstants consts =
        compute_constants_inpaint(cfg, mask.observed_fraction());

    InpaintState s;
    s.Z = QMatrix::zeros(Y.rows(), Y.cols());
    s.W = s.Z;
    s.Lambda1 = s.Z;
    s.Lambda2 = s.Z;
    s.Z_prev = s.Z;
    s.W_prev = s.W;
    s.Lambda1_prev = s.Lambda1;
    s.Lambda2_prev = s.Lambda2;
    s.obs_residual = QMatrix::zeros(Y.rows(), Y.cols());

    SurrogateSpec surr = cfg.surrogate;
    std::vector<double> sigma_prev(std::min(Y.rows(), Y.cols()), 0.0);

    double delta = cfg.delta.initial_value();
    IterationTrace trace;
    InpaintResult result;

    for (int k = 0; k < max_outer; ++k) {
        const auto t0 = std::chrono::steady_clock::now();
        refresh_adaptive_weights(surr, sigma_prev);

        // Z-step: quadratic anchor from the Lagrangian (note the minus on the
        // multiplier), then the spectral proximal map with mu_eff = beta1+L1.
        QMatrix anchor = lincomb(beta1 / mu_eff, s.W, -1.0 / mu_eff, s.Lambda1);
        kernels::axpy(cfg.L1 / mu_eff, s.Z.data(), anchor.data(),
                      anchor.total());
        ProxProblem pp{std::move(anchor), mu_eff, surr, cfg.eta_ccp,
                       cfg.ccp_max_iters};
        ProxResult pr = spectral_prox(pp);
        s.Z_prev = std::move(s.Z);
        s.Z = std::move(pr.X);

        // W-step: explicit solve of the blended quadratic. The data operator
        // restricted to the observed set is diagonal after conjugating by the
        // transform, so G^{-1} is an entrywise division there.
        const HuberSpec hs{delta, cfg.lambda};
        const QMatrix grad = huber_grad(s.W, hs);
        QMatrix masked_data = lincomb(beta2, PY, -1.0, s.Lambda2);
        for (int p = 0; p < 4; ++p)
            kernels::mask_mul(masked_data.plane(p), mask_plane.data(),
                              masked_data.plane_size());
        QMatrix V = T.forward(masked_data);
        kernels::axpy(beta1, s.Z.data(), V.data(), V.total());
        kernels::axpy(-1.0, s.Lambda1.data(), V.data(), V.total());
        kernels::axpy(cfg.L2, s.W.data(), V.data(), V.total());
        kernels::axpy(-cfg.lambda, grad.data(), V.data(), V.total());
        QMatrix U = T.adjoint(V);
        for (int p = 0; p < 4; ++p)
            kernels::masked_div(U.plane(p), mask_plane.data(), beta1 + cfg.L2,
                                beta2, U.plane_size());
        s.W_prev = std::move(s.W);
        s.W = T.forward(U);

        // Multiplier steps (mu*beta1 and mu*beta2 respectively).
        s.Lambda1_prev = s.Lambda1;
        const QMatrix C1 = lincomb(1.0, s.Z, -1.0, s.W);
        kernels::axpy(mu * beta1, C1.data(), s.Lambda1.data(),
                      s.Lambda1.total());
        s.Lambda2_prev = s.Lambda2;
        QMatrix AW = T.adjoint(s.W);
        for (int p = 0; p < 4; ++p)
            kernels::mask_mul(AW.plane(p), mask_plane.data(), AW.plane_size());
        const QMatrix g2 = lincomb(1.0, AW, -1.0, PY);
        kernels::axpy(mu * beta2, g2.data(), s.Lambda2.data(),
                      s.Lambda2.total());

        const double dZ = norm_diff(s.Z, s.Z_prev);
        const double dW = norm_diff(s.W, s.W_prev);
        const double dL1 = norm_diff(s.Lambda1, s.Lambda1_prev);
        const double dL2 = norm_diff(s.Lambda2, s.Lambda2_prev);
        const double gap1 = frobenius_norm(C1);
        const double gap2 = frobenius_norm(g2);
        const double eps = gap1 + gap2;

        const std::vector<double> sigma_now = sorted_desc(pr.sigma_out);
        const double objective =
            spectral_penalty(sigma_now, surr) + cfg.lambda * huber(s.W, hs);
        const double lagr = objective + inner(s.Lambda1, C1) +
                            0.5 * beta1 * gap1 * gap1 + inner(s.Lambda2, g2) +
                            0.5 * beta2 * gap2 * gap2;
        const double merit =
            lagr + 2.0 * consts.r * consts.theta1 * dZ * dZ +
            consts.r * consts.theta1 * s.dZ_prev_norm * s.dZ_prev_norm +
            2.0 * consts.r * consts.theta2 * dW * dW +
            consts.r * consts.theta2 * s.dW_prev_norm * s.dW_prev_norm +
            consts.r * consts.theta3 * dL1 * dL1 +
            consts.r * consts.theta4 * s.dLambda1_prev_norm *
                s.dLambda1_prev_norm +
            consts.r * consts.theta5 * dL2 * dL2;

        s.obs_residual = g2;
        s.k = k + 1;

        TraceRow row;
        row.k = s.k;
        row.eps_k = eps;
        row.gap1 = gap1;
        row.gap2 = gap2;
        row.objective = objective;
        row.merit = merit;
        row.dX = dZ;
        row.dW = dW;
        row.dLambda1 = dL1;
        row.dLambda2 = dL2;
        row.wall_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
        trace.rows.push_back(row);

        finite_or_throw(eps, "residual", trace);
        if (frobenius_norm(s.Z) > diverge_bound ||
            frobenius_norm(s.W) > diverge_bound)
            throw DivergenceError("pl_admm_nf_inpaint: iterate norm exceeded " +
                                      std::to_string(cfg.divergence_factor) +
                                      " * ||Y||",
                                  std::move(trace));

        if (callback) {
            InpaintIterExtras extras{pp.anchor, mu_eff,  pr.sigma_in,
                                     pr.sigma_out, delta, eps,
                                     objective,    merit};
            callback(s, extras);
        }

        sigma_prev = sigma_now;
        delta = cfg.delta.value_for_residual(eps);
        s.dZ_prev_norm = dZ;
        s.dW_prev_norm = dW;
        s.dLambda1_prev_norm = dL1;

        if (eps < cfg.eta) {
            result.converged = true;
            break;
        }
    }

    result.Z = s.Z;
    result.X = T.adjoint(s.Z);
    result.iters = s.k;
    result.trace = std::move(trace);
    return result;
}

} // namespace qslr
