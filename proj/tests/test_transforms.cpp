#include <doctest.h>

#include "qslr/qsvd.hpp"
#include "qslr/transforms.hpp"
#include "test_support.hpp"

using namespace qslr;
using test::max_abs_diff;
using test::random_qmatrix;

TEST_CASE("qdct: constant image concentrates in the DC coefficient") {
    QMatrix X(8, 8);
    double* w = X.plane(0);
    for (std::size_t i = 0; i < X.plane_size(); ++i) w[i] = 0.5;
    const OrthoTransform T(TransformKind::QDCT, 8, 8);
    const QMatrix W = T.forward(X);
    CHECK(W.at(0, 0).w == doctest::Approx(0.5 * 8.0).epsilon(1e-12));
    for (std::size_t i = 0; i < 8; ++i)
        for (std::size_t j = 0; j < 8; ++j)
            if (i + j > 0) CHECK(modulus(W.at(i, j)) < 1e-12);
}

TEST_CASE("identity kind is the identity") {
    Rng rng(41);
    const QMatrix X = random_qmatrix(5, 9, rng);
    const OrthoTransform T(TransformKind::Identity, 5, 9);
    CHECK(max_abs_diff(T.forward(X), X) == 0.0);
    CHECK(max_abs_diff(T.adjoint(X), X) == 0.0);
}

TEST_CASE("qdct: adjoint inverts forward and pairs under the inner product") {
    Rng rng(42);
    const OrthoTransform T(TransformKind::QDCT, 12, 9);
    const QMatrix X = random_qmatrix(12, 9, rng);
    CHECK(max_abs_diff(T.adjoint(T.forward(X)), X) < 1e-10);
    CHECK(max_abs_diff(T.forward(T.adjoint(X)), X) < 1e-10);

    const QMatrix W = random_qmatrix(12, 9, rng);
    CHECK(inner(T.forward(X), W) ==
          doctest::Approx(inner(X, T.adjoint(W))).epsilon(1e-10));

    CHECK_THROWS_AS(T.forward(random_qmatrix(3, 3, rng)), ShapeError);
}

TEST_CASE("qdct: Parseval on random input") {
    Rng rng(43);
    const OrthoTransform T(TransformKind::QDCT, 16, 16);
    const QMatrix X = random_qmatrix(16, 16, rng);
    CHECK(frobenius_norm(T.forward(X)) ==
          doctest::Approx(frobenius_norm(X)).epsilon(1e-10));
}

TEST_CASE("qdct: linearity") {
    Rng rng(44);
    const OrthoTransform T(TransformKind::QDCT, 10, 7);
    QMatrix X = random_qmatrix(10, 7, rng);
    QMatrix Y = random_qmatrix(10, 7, rng);
    X *= 1.0 / frobenius_norm(X);
    Y *= 1.0 / frobenius_norm(Y);
    const double a = 0.7, b = -1.3;
    const QMatrix lhs = T.forward(lincomb(a, X, b, Y));
    const QMatrix rhs = lincomb(a, T.forward(X), b, T.forward(Y));
    CHECK(max_abs_diff(lhs, rhs) < 1e-12);
}

TEST_CASE("qdct preserves singular values (two-sided real orthogonal form)") {
    Rng rng(45);
    const OrthoTransform T(TransformKind::QDCT, 12, 12);
    const QMatrix X = random_qmatrix(12, 12, rng);
    const auto sx = qsvd_values(X);
    const auto sw = qsvd_values(T.forward(X));
    REQUIRE(sx.size() == sw.size());
    for (std::size_t i = 0; i < sx.size(); ++i)
        CHECK(sx[i] == doctest::Approx(sw[i]).epsilon(1e-8));
}

TEST_CASE("dct matrix is orthonormal") {
    const auto D = dct_matrix(9);
    for (std::size_t i = 0; i < 9; ++i)
        for (std::size_t j = 0; j < 9; ++j) {
            double dot = 0;
            for (std::size_t t = 0; t < 9; ++t)
                dot += D[i * 9 + t] * D[j * 9 + t];
            CHECK(dot == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-12));
        }
}
