#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "qslr/prox.hpp"
#include "qslr/qsvd.hpp"
#include "test_support.hpp"

using namespace qslr;
using test::random_qmatrix;

namespace {

SurrogateSpec make(SurrogateKind kind, double gamma, double eps = 0.0) {
    SurrogateSpec s;
    s.kind = kind;
    s.gamma = gamma;
    s.epsilon = eps;
    return s;
}

} // namespace

TEST_CASE("sigma_ccp: nuclear soft threshold in one step") {
    const SurrogateSpec nuc = make(SurrogateKind::Nuclear, 1.0);
    const std::vector<double> sig{3.0, 1.0, 0.2};
    CcpStats stats;
    const auto out = sigma_ccp(sig, 1.0, nuc, 1e-10, 500, &stats);
    CHECK(stats.converged);
    CHECK(out[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(out[1] == doctest::Approx(0.0));
    CHECK(out[2] == doctest::Approx(0.0));
}

TEST_CASE("sigma_ccp: zero input is a fixed point") {
    for (const auto kind :
         {SurrogateKind::Nuclear, SurrogateKind::Laplace, SurrogateKind::LogDet}) {
        const SurrogateSpec spec = make(kind, 0.5, 0.01);
        const std::vector<double> zeros(4, 0.0);
        const auto out = sigma_ccp(zeros, 2.0, spec, 1e-10, 500);
        for (double v : out) CHECK(v == doctest::Approx(0.0));
    }
}

TEST_CASE("sigma_ccp: output is a fixed point of the update") {
    Rng rng(61);
    const SurrogateSpec spec = make(SurrogateKind::Laplace, 0.5, 0.01);
    std::vector<double> sig(6);
    for (auto& s : sig) s = 2.0 * rng.uniform();
    std::sort(sig.rbegin(), sig.rend());
    const double mu = 2.0;
    const auto out = sigma_ccp(sig, mu, spec, 1e-12, 2000);
    for (std::size_t i = 0; i < sig.size(); ++i) {
        const double g = dphi_smoothed_at(i, out[i], spec);
        const double next = std::max(sig[i] - g / mu, 0.0);
        CHECK(std::abs(next - out[i]) < 1e-10);
    }
}

TEST_CASE("sigma_ccp: schatten with gamma<1 and eps=0 is rejected") {
    const SurrogateSpec spec = make(SurrogateKind::SchattenGamma, 0.5, 0.0);
    const std::vector<double> sig{1.0};
    CHECK_THROWS_AS(sigma_ccp(sig, 1.0, spec, 1e-10, 100), ConfigError);
}

TEST_CASE("scalar_prox_oracle: closed forms") {
    const SurrogateSpec nuc = make(SurrogateKind::Nuclear, 1.0);
    CHECK(scalar_prox_oracle(3.0, 1.0, nuc, 1e-5) ==
          doctest::Approx(2.0).epsilon(1e-4));
    CHECK(scalar_prox_oracle(0.0, 1.0, nuc, 1e-5) == doctest::Approx(0.0));

    // Degenerate "zero" surrogate via Laplace at enormous gamma: the
    // quadratic dominates and the oracle returns the anchor.
    SurrogateSpec flat = make(SurrogateKind::Laplace, 1e12);
    CHECK(scalar_prox_oracle(1.7, 2.0, flat, 1e-5) ==
          doctest::Approx(1.7).epsilon(1e-4));
}

TEST_CASE("sigma_ccp fixed points match the brute-force oracle") {
    // The inner iteration is a stationary-point method; on these parameter
    // ranges it lands on the oracle's global grid minimizer.
    Rng rng(62);
    const std::vector<SurrogateSpec> specs = {
        make(SurrogateKind::Nuclear, 0.5, 0.01),
        make(SurrogateKind::SchattenGamma, 0.5, 0.01),
        make(SurrogateKind::Laplace, 0.5, 0.01),
        make(SurrogateKind::LogDet, 0.5, 0.01),
        make(SurrogateKind::Etp, 2.0, 0.01)};
    for (const auto& spec : specs) {
        for (double mu : {0.5, 2.0, 10.0}) {
            for (int t = 0; t < 6; ++t) {
                const double a = 3.0 * rng.uniform();
                const std::vector<double> sig{a};
                const auto out = sigma_ccp(sig, mu, spec, 1e-12, 5000);
                const double oracle = scalar_prox_oracle(a, mu, spec, 1e-5);
                const double f_out =
                    sigma_objective(out, sig, mu, spec);
                const std::vector<double> oracle_v{oracle};
                const double f_oracle =
                    sigma_objective(oracle_v, sig, mu, spec);
                CHECK(f_out <= f_oracle + 2e-4);
            }
        }
    }
}

TEST_CASE("spectral_prox: nuclear soft-thresholding of a diagonal anchor") {
    QMatrix D(2, 2);
    D.set(0, 0, Quaternion::real(3.0));
    D.set(1, 1, Quaternion::real(1.0));
    ProxProblem p;
    p.anchor = D;
    p.mu = 1.0;
    p.spec = make(SurrogateKind::Nuclear, 1.0);
    const ProxResult r = spectral_prox(p);
    const auto sig = qsvd_values(r.X);
    CHECK(sig[0] == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(sig[1] == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("spectral_prox: huge mu returns the anchor") {
    Rng rng(63);
    const QMatrix A = random_qmatrix(6, 5, rng);
    ProxProblem p;
    p.anchor = A;
    p.mu = 1e9;
    p.spec = make(SurrogateKind::Laplace, 0.5, 0.01);
    const ProxResult r = spectral_prox(p);
    CHECK(frobenius_norm(r.X - A) <= 1e-6 * frobenius_norm(A));
}

TEST_CASE("spectral_prox: per-value agreement with the scalar oracle") {
    // anchor with prescribed singular values via a random unitary sandwich
    Rng rng(64);
    const std::vector<double> values{1.2, 0.4, 0.05};
    QMatrix D(3, 3);
    for (std::size_t i = 0; i < 3; ++i)
        D.set(i, i, Quaternion::real(values[i]));
    const QsvdResult q1 = qsvd(random_qmatrix(3, 3, rng));
    const QsvdResult q2 = qsvd(random_qmatrix(3, 3, rng));
    const QMatrix anchor = qmatmul(q1.U, qmatmul(D, conj_transpose(q2.V)));

    ProxProblem p;
    p.anchor = anchor;
    p.mu = 2.0;
    p.spec = make(SurrogateKind::Laplace, 0.5, 0.01);
    p.tol = 1e-12;
    p.max_iters = 5000;
    const ProxResult r = spectral_prox(p);

    std::vector<double> out = r.sigma_out;
    std::sort(out.rbegin(), out.rend());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double oracle = scalar_prox_oracle(values[i], p.mu, p.spec, 1e-5);
        CHECK(std::abs(out[i] - oracle) < 2e-4);
    }
}

TEST_CASE("spectral_prox: unitary equivariance of the singular values") {
    Rng rng(65);
    const QMatrix A = random_qmatrix(6, 6, rng);
    const QsvdResult q1 = qsvd(random_qmatrix(6, 6, rng));
    const QsvdResult q2 = qsvd(random_qmatrix(6, 6, rng));
    const QMatrix B = qmatmul(q1.U, qmatmul(A, q2.V));

    ProxProblem p;
    p.mu = 1.5;
    p.spec = make(SurrogateKind::SchattenGamma, 0.5, 0.01);
    p.anchor = A;
    const auto sa = spectral_prox(p).sigma_out;
    p.anchor = B;
    const auto sb = spectral_prox(p).sigma_out;
    REQUIRE(sa.size() == sb.size());
    for (std::size_t i = 0; i < sa.size(); ++i)
        CHECK(std::abs(sa[i] - sb[i]) < 1e-7);
}

TEST_CASE("ccp objective is monotone along the iteration") {
    // Re-run the update by hand and check the surrogate objective never
    // increases (the inner method is a majorize-minimize scheme).
    Rng rng(66);
    const SurrogateSpec spec = make(SurrogateKind::Laplace, 0.5, 0.01);
    std::vector<double> sig(5);
    for (auto& s : sig) s = 2.0 * rng.uniform();
    const double mu = 1.0;
    std::vector<double> s_cur(sig.size(), 0.0);
    double prev = sigma_objective(s_cur, sig, mu, spec);
    for (int k = 0; k < 100; ++k) {
        for (std::size_t i = 0; i < sig.size(); ++i) {
            const double g = dphi_smoothed_at(i, s_cur[i], spec);
            s_cur[i] = std::max(sig[i] - g / mu, 0.0);
        }
        const double cur = sigma_objective(s_cur, sig, mu, spec);
        CHECK(cur <= prev + 1e-12);
        prev = cur;
    }
}

TEST_CASE("sigma_ccp preserves ordering for shared scalar surrogates") {
    Rng rng(67);
    for (const auto kind : {SurrogateKind::Nuclear, SurrogateKind::Laplace,
                            SurrogateKind::SchattenGamma}) {
        const SurrogateSpec spec = make(kind, 0.5, 0.01);
        std::vector<double> sig(8);
        for (auto& s : sig) s = 3.0 * rng.uniform();
        std::sort(sig.rbegin(), sig.rend());
        const auto out = sigma_ccp(sig, 2.0, spec, 1e-12, 2000);
        CHECK(std::is_sorted(out.rbegin(), out.rend()));
    }
}
