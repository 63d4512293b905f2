#include "qslr/prox.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qslr/errors.hpp"
#include "qslr/qsvd.hpp"

namespace qslr {

double sigma_objective(std::span<const double> s, std::span<const double> s_hat,
                       double mu, const SurrogateSpec& spec) {
    double total = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double h = std::sqrt(s[i] * s[i] + spec.epsilon * spec.epsilon);
        const double d = s[i] - s_hat[i];
        total += phi_at(i, h, spec) + 0.5 * mu * d * d;
    }
    return total;
}

namespace {

double scalar_objective(std::size_t i, double s, double a, double mu,
                        const SurrogateSpec& spec) {
    const double h = std::sqrt(s * s + spec.epsilon * spec.epsilon);
    const double d = s - a;
    return phi_at(i, h, spec) + 0.5 * mu * d * d;
}

// Fixed points of s -> max(a - psi'(s)/mu, 0) are the stationary points of
// psi(s) + (mu/2)(s-a)^2 on [0, inf). The plain recursion can cycle when
// |psi''|/mu > 1 (small singular values with a sharply smoothed surrogate),
// so unsettled components are resolved by locating every stationary point
// via a sign-change scan plus bisection and keeping the lowest objective.
double scalar_fixed_point(std::size_t i, double a, double mu,
                          const SurrogateSpec& spec) {
    if (a <= 0.0) return 0.0;
    const auto gap = [&](double s) {
        return mu * (a - s) - dphi_smoothed_at(i, s, spec);
    };
    std::vector<double> candidates;
    if (a - dphi_smoothed_at(i, 0.0, spec) / mu <= 0.0)
        candidates.push_back(0.0); // the clamp makes 0 a fixed point
    constexpr int kScan = 256;
    double s_prev = 0.0;
    double g_prev = gap(0.0);
    for (int j = 1; j <= kScan; ++j) {
        const double s_cur = a * j / kScan;
        const double g_cur = gap(s_cur);
        if (g_prev == 0.0) {
            candidates.push_back(s_prev);
        } else if ((g_prev > 0.0) != (g_cur > 0.0)) {
            double lo = s_prev, hi = s_cur, glo = g_prev;
            for (int b = 0; b < 100; ++b) {
                const double mid = 0.5 * (lo + hi);
                const double gm = gap(mid);
                if (gm == 0.0) {
                    lo = hi = mid;
                    break;
                }
                if ((gm > 0.0) == (glo > 0.0)) {
                    lo = mid;
                    glo = gm;
                } else {
                    hi = mid;
                }
            }
            candidates.push_back(0.5 * (lo + hi));
        }
        s_prev = s_cur;
        g_prev = g_cur;
    }
    if (g_prev == 0.0) candidates.push_back(s_prev);
    if (candidates.empty()) candidates.push_back(a); // defensive; g(a) <= 0
    double best = candidates.front();
    double best_f = scalar_objective(i, best, a, mu, spec);
    for (double c : candidates) {
        const double f = scalar_objective(i, c, a, mu, spec);
        if (f < best_f) {
            best_f = f;
            best = c;
        }
    }
    return best;
}

} // namespace

std::vector<double> sigma_ccp(std::span<const double> sigma_hat, double mu,
                              const SurrogateSpec& spec, double tol,
                              int max_iters, CcpStats* stats) {
    if (mu <= 0.0) throw ConfigError("sigma_ccp: mu must be > 0");
    if (tol <= 0.0) throw ConfigError("sigma_ccp: tol must be > 0");
    spec.validate();
    // With eps = 0 a Schatten derivative blows up at the origin and the
    // linearized update is undefined there.
    if (spec.epsilon == 0.0 && spec.gamma < 1.0 &&
        (spec.kind == SurrogateKind::SchattenGamma ||
         spec.kind == SurrogateKind::WeightedSchattenGamma))
        throw ConfigError(
            "sigma_ccp: Schatten with gamma < 1 is singular at 0; set epsilon > 0");

    const std::size_t n = sigma_hat.size();
    std::vector<double> s(n, 0.0), next(n);
    int k = 0;
    bool settled = false;
    for (; k < max_iters; ++k) {
        double diff_sq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double g = dphi_smoothed_at(i, s[i], spec);
            next[i] = std::max(sigma_hat[i] - g / mu, 0.0);
            const double d = next[i] - s[i];
            diff_sq += d * d;
        }
        std::swap(s, next);
        if (std::sqrt(diff_sq) < tol) {
            ++k;
            settled = true;
            break;
        }
    }
    int fallbacks = 0;
    if (!settled) {
        // Per-component check: components whose update still moves get the
        // safeguarded stationary-point solve (the update is separable).
        const double tol_i = tol / std::sqrt(static_cast<double>(std::max<std::size_t>(n, 1)));
        for (std::size_t i = 0; i < n; ++i) {
            const double g = dphi_smoothed_at(i, s[i], spec);
            const double t = std::max(sigma_hat[i] - g / mu, 0.0);
            if (std::abs(t - s[i]) >= tol_i) {
                s[i] = scalar_fixed_point(i, sigma_hat[i], mu, spec);
                ++fallbacks;
            }
        }
    }
    if (stats) {
        stats->iters = k;
        stats->converged = true;
        stats->fallback_components = fallbacks;
    }
    return s;
}

ProxResult spectral_prox(const ProxProblem& p) {
    if (p.anchor.empty()) throw ShapeError("spectral_prox: empty anchor");
    QsvdOptions opts;
    opts.verify = false; // hot path; invariants are covered by the qsvd tests
    const QsvdResult svd = qsvd_thin(p.anchor, opts);

    ProxResult res;
    res.sigma_in = svd.sigma;
    CcpStats stats;
    std::vector<double> s_star =
        sigma_ccp(svd.sigma, p.mu, p.spec, p.tol, p.max_iters, &stats);
    res.converged = stats.converged;
    res.iters = stats.iters;

    // Keep the anchor when the fixed point does not actually descend.
    const double f_star = sigma_objective(s_star, svd.sigma, p.mu, p.spec);
    const double f_anchor = sigma_objective(svd.sigma, svd.sigma, p.mu, p.spec);
    if (f_star > f_anchor) {
        res.kept_anchor = true;
        res.sigma_out = svd.sigma;
        res.X = p.anchor;
        return res;
    }

    res.sigma_out = s_star;
    QsvdResult scaled = svd;
    scaled.sigma = s_star;
    res.X = qsvd_reconstruct(scaled);
    return res;
}

double scalar_prox_oracle(double a, double mu, const SurrogateSpec& spec,
                          double grid_step) {
    if (grid_step <= 0.0) throw ConfigError("scalar_prox_oracle: grid_step > 0");
    if (a < 0.0) throw DomainError("scalar_prox_oracle: a must be >= 0");
    const double hi = a + 3.0 / mu + 1.0;
    double best_s = 0.0;
    double best_f = std::numeric_limits<double>::infinity();
    const auto steps = static_cast<long long>(hi / grid_step) + 1;
    for (long long i = 0; i <= steps; ++i) {
        const double s = std::min(static_cast<double>(i) * grid_step, hi);
        const double h = std::sqrt(s * s + spec.epsilon * spec.epsilon);
        const double d = s - a;
        const double f = phi_at(0, h, spec) + 0.5 * mu * d * d;
        if (f < best_f) {
            best_f = f;
            best_s = s;
        }
    }
    return best_s;
}

} // namespace qslr
