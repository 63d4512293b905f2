#include <doctest.h>

#include <cmath>

#include "qslr/surrogates.hpp"
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

// All unweighted kinds with parameters from the experiment ranges.
std::vector<SurrogateSpec> all_kinds() {
    return {make(SurrogateKind::Nuclear, 0.5),
            make(SurrogateKind::LogDet, 0.5),
            make(SurrogateKind::SchattenGamma, 0.5),
            make(SurrogateKind::Logarithm, 0.5),
            make(SurrogateKind::Laplace, 0.5),
            make(SurrogateKind::Etp, 2.0)};
}

} // namespace

TEST_CASE("phi: tabulated values") {
    CHECK(phi(0.0, make(SurrogateKind::Laplace, 1.0)) == doctest::Approx(0.0));
    CHECK(phi(4.0, make(SurrogateKind::SchattenGamma, 0.5)) ==
          doctest::Approx(2.0));
    CHECK(phi(1.0, make(SurrogateKind::LogDet, 1.0)) ==
          doctest::Approx(std::log(2.0)));
    CHECK(phi(3.0, make(SurrogateKind::Nuclear, 1.0)) == doctest::Approx(3.0));
    CHECK(phi(2.0, make(SurrogateKind::Logarithm, 1.0)) ==
          doctest::Approx(std::log(3.0)));

    SurrogateSpec weighted = make(SurrogateKind::WeightedSchattenGamma, 0.5);
    weighted.weights = {2.0, 3.0};
    CHECK(phi_at(1, 4.0, weighted) == doctest::Approx(6.0));
    CHECK_THROWS_AS(phi(1.0, weighted), ConfigError);
    CHECK_THROWS_AS(phi_at(2, 1.0, weighted), ConfigError);
}

TEST_CASE("dphi: closed forms and the finite-difference oracle") {
    CHECK(dphi(7.3, make(SurrogateKind::Nuclear, 1.0)) == doctest::Approx(1.0));
    CHECK(dphi(1.0, make(SurrogateKind::Laplace, 1.0)) ==
          doctest::Approx(std::exp(-1.0)));

    const double h = 1e-6;
    for (const auto& spec : all_kinds()) {
        const double x = 0.7;
        const double fd = (phi(x + h, spec) - phi(x - h, spec)) / (2.0 * h);
        CHECK(dphi(x, spec) == doctest::Approx(fd).epsilon(1e-6));
    }

    CHECK_THROWS_AS(dphi(0.0, make(SurrogateKind::SchattenGamma, 0.5)),
                    DomainError);
}

TEST_CASE("phi is nondecreasing on the nonnegative axis") {
    Rng rng(51);
    for (const auto& spec : all_kinds()) {
        for (int t = 0; t < 100; ++t) {
            const double a = 5.0 * rng.uniform();
            const double b = a + 5.0 * rng.uniform();
            CHECK(phi(b, spec) >= phi(a, spec) - 1e-12);
        }
    }
}

TEST_CASE("spectral_penalty: definitions and nuclear reduction") {
    SurrogateSpec nuc = make(SurrogateKind::Nuclear, 1.0);
    const std::vector<double> sig{3.0, 1.0};
    CHECK(spectral_penalty(sig, nuc) == doctest::Approx(4.0));

    SurrogateSpec lap = make(SurrogateKind::Laplace, 1.0, 0.01);
    const std::vector<double> zeros(5, 0.0);
    CHECK(spectral_penalty(zeros, lap) ==
          doctest::Approx(5.0 * (1.0 - std::exp(-0.01))));

    // Termwise agreement with phi on the smoothed argument.
    SurrogateSpec sch = make(SurrogateKind::SchattenGamma, 0.5, 0.2);
    const std::vector<double> v{1.2, 0.4, 0.05};
    double expect = 0.0;
    for (double s : v) expect += phi(std::sqrt(s * s + 0.04), sch);
    CHECK(spectral_penalty(v, sch) == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("huber: values on single entries") {
    HuberSpec spec{1.0, 0.0};
    QMatrix W(1, 1);
    W.set(0, 0, {2.0, 0.0, 0.0, 0.0});
    CHECK(huber(W, spec) == doctest::Approx(1.5));
    W.set(0, 0, {0.0, 0.5, 0.0, 0.0});
    CHECK(huber(W, spec) == doctest::Approx(0.125));
    W.set(0, 0, {0.0, 0.0, 0.0, 0.0});
    CHECK(huber(W, spec) == doctest::Approx(0.0));
    CHECK(frobenius_norm(huber_grad(W, spec)) == 0.0);
}

TEST_CASE("huber_grad matches finite differences on all planes") {
    Rng rng(52);
    QMatrix W = random_qmatrix(4, 4, rng);
    const HuberSpec spec{0.8, 0.0};
    const QMatrix G = huber_grad(W, spec);
    const double h = 1e-6;
    for (int p = 0; p < 4; ++p) {
        for (std::size_t i = 0; i < W.plane_size(); ++i) {
            const double orig = W.plane(p)[i];
            W.plane(p)[i] = orig + h;
            const double up = huber(W, spec);
            W.plane(p)[i] = orig - h;
            const double down = huber(W, spec);
            W.plane(p)[i] = orig;
            const double fd = (up - down) / (2.0 * h);
            CHECK(G.plane(p)[i] == doctest::Approx(fd).epsilon(1e-5));
        }
    }
}

TEST_CASE("huber_grad is (1/delta)-Lipschitz") {
    Rng rng(53);
    for (double delta : {1.0, 0.25}) {
        const HuberSpec spec{delta, 0.0};
        for (int t = 0; t < 40; ++t) {
            const QMatrix W1 = random_qmatrix(6, 5, rng);
            const QMatrix W2 = random_qmatrix(6, 5, rng);
            const double lhs =
                frobenius_norm(huber_grad(W1, spec) - huber_grad(W2, spec));
            const double rhs = frobenius_norm(W1 - W2) / delta;
            CHECK(lhs <= rhs + 1e-10);
        }
    }
}

TEST_CASE("surrogate validation") {
    SurrogateSpec bad = make(SurrogateKind::SchattenGamma, 1.5);
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    SurrogateSpec weighted = make(SurrogateKind::WeightedSchattenGamma, 0.5);
    CHECK_THROWS_AS(weighted.validate(), ConfigError); // no weights, no rule
    weighted.adaptive_weight_scale = 10.0;
    CHECK_NOTHROW(weighted.validate());
}
