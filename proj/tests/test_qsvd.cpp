#include <doctest.h>

#include <lapacke.h>

#include <algorithm>

#include "qslr/qsvd.hpp"
#include "test_support.hpp"

using namespace qslr;
using test::max_abs_diff;
using test::random_qmatrix;

namespace {

// Independent real-SVD oracle (values only, descending).
std::vector<double> real_singular_values(const std::vector<double>& a_rowmajor,
                                         std::size_t m, std::size_t n) {
    std::vector<double> a = a_rowmajor;
    std::vector<double> s(std::min(m, n));
    const lapack_int info = LAPACKE_dgesdd(
        LAPACK_ROW_MAJOR, 'N', static_cast<lapack_int>(m),
        static_cast<lapack_int>(n), a.data(), static_cast<lapack_int>(n),
        s.data(), nullptr, static_cast<lapack_int>(m), nullptr,
        static_cast<lapack_int>(n));
    REQUIRE(info == 0);
    return s;
}

double unitary_defect(const QMatrix& U) {
    const QMatrix G = qmatmul(conj_transpose(U), U);
    return frobenius_norm(G - QMatrix::identity(G.rows()));
}

} // namespace

TEST_CASE("complex adjoint blocks for scalar units") {
    QMatrix one(1, 1);
    one.set(0, 0, Quaternion::real(1.0));
    CMatrix M = to_complex_adjoint(one);
    CHECK(M.at(0, 0) == std::complex<double>(1, 0));
    CHECK(M.at(0, 1) == std::complex<double>(0, 0));
    CHECK(M.at(1, 0) == std::complex<double>(0, 0));
    CHECK(M.at(1, 1) == std::complex<double>(1, 0));

    QMatrix qi(1, 1);
    qi.set(0, 0, {0, 1, 0, 0});
    M = to_complex_adjoint(qi);
    CHECK(M.at(0, 0) == std::complex<double>(0, 1));
    CHECK(M.at(0, 1) == std::complex<double>(0, 0));
    CHECK(M.at(1, 0) == std::complex<double>(0, 0));
    CHECK(M.at(1, 1) == std::complex<double>(0, -1));
}

TEST_CASE("complex adjoint is a *-homomorphism and round-trips") {
    Rng rng(31);
    const QMatrix A = random_qmatrix(6, 4, rng);
    CHECK(max_abs_diff(from_complex_adjoint(to_complex_adjoint(A)), A) <=
          1e-12);

    const QMatrix B = random_qmatrix(4, 5, rng);
    const CMatrix MA = to_complex_adjoint(A);
    const CMatrix MB = to_complex_adjoint(B);
    const CMatrix MAB = to_complex_adjoint(qmatmul(A, B));
    // (MA*MB)(i,j) must equal MAB(i,j)
    for (std::size_t i = 0; i < MAB.rows; ++i)
        for (std::size_t j = 0; j < MAB.cols; ++j) {
            std::complex<double> acc = 0;
            for (std::size_t t = 0; t < MA.cols; ++t)
                acc += MA.at(i, t) * MB.at(t, j);
            CHECK(std::abs(acc - MAB.at(i, j)) < 1e-12);
        }

    // Broken symmetry is rejected.
    CMatrix bad = to_complex_adjoint(A);
    bad.at(1, 1) += std::complex<double>(0.1, 0);
    CHECK_THROWS_AS(from_complex_adjoint(bad), NumericalError);
}

TEST_CASE("qsvd: diagonal and real-embedded oracles") {
    QMatrix D(2, 2);
    D.set(0, 0, Quaternion::real(3.0));
    D.set(1, 1, Quaternion::real(1.0));
    const QsvdResult r = qsvd(D);
    REQUIRE(r.sigma.size() == 2);
    CHECK(r.sigma[0] == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(r.sigma[1] == doctest::Approx(1.0).epsilon(1e-12));

    // A real matrix embedded in the w plane has the singular values of the
    // real matrix itself.
    Rng rng(32);
    for (int t = 0; t < 5; ++t) {
        const std::size_t m = 7, n = 5;
        QMatrix A(m, n);
        std::vector<double> plane(m * n);
        for (auto& v : plane) v = rng.normal();
        std::copy(plane.begin(), plane.end(), A.plane(0));
        const QsvdResult qr = qsvd(A);
        const std::vector<double> oracle = real_singular_values(plane, m, n);
        REQUIRE(qr.sigma.size() == oracle.size());
        for (std::size_t i = 0; i < oracle.size(); ++i)
            CHECK(qr.sigma[i] == doctest::Approx(oracle[i]).epsilon(1e-10));
    }
}

TEST_CASE("qsvd: reconstruction and unitarity on random matrices") {
    Rng rng(33);
    for (auto [m, n] : {std::pair<std::size_t, std::size_t>{8, 6},
                        {6, 8},
                        {5, 5},
                        {12, 3}}) {
        const QMatrix A = random_qmatrix(m, n, rng);
        const QsvdResult r = qsvd(A);
        REQUIRE(r.U.cols() == m);
        REQUIRE(r.V.cols() == n);
        CHECK(std::is_sorted(r.sigma.rbegin(), r.sigma.rend()));
        for (double s : r.sigma) CHECK(s >= 0.0);
        CHECK(frobenius_norm(A - qsvd_reconstruct(r)) <=
              1e-10 * frobenius_norm(A));
        CHECK(unitary_defect(r.U) <= 1e-8);
        CHECK(unitary_defect(r.V) <= 1e-8);
    }
}

TEST_CASE("qsvd: degenerate spectra (identity and repeated blocks)") {
    const QMatrix I = QMatrix::identity(6);
    const QsvdResult r = qsvd(I);
    for (double s : r.sigma) CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(frobenius_norm(I - qsvd_reconstruct(r)) <= 1e-10 * frobenius_norm(I));
    CHECK(unitary_defect(r.U) <= 1e-8);

    // Rank-deficient: one repeated direction plus a null space.
    Rng rng(34);
    const QMatrix u = random_qmatrix(7, 1, rng);
    const QMatrix v = random_qmatrix(4, 1, rng);
    const QMatrix A = qmatmul(u, conj_transpose(v));
    const QsvdResult rr = qsvd(A);
    CHECK(rank_from_sigma(rr.sigma, 1e-8 * rr.sigma[0]) == 1);
    CHECK(frobenius_norm(A - qsvd_reconstruct(rr)) <=
          1e-10 * frobenius_norm(A));
    CHECK(unitary_defect(rr.U) <= 1e-8);
    CHECK(unitary_defect(rr.V) <= 1e-8);
}

TEST_CASE("qsvd sigma matches deduplicated complex-adjoint values") {
    Rng rng(35);
    const QMatrix A = random_qmatrix(9, 7, rng);
    const QsvdResult r = qsvd(A);
    const std::vector<double> cs = complex_singular_values(to_complex_adjoint(A));
    REQUIRE(cs.size() == 2 * r.sigma.size());
    for (std::size_t t = 0; t < r.sigma.size(); ++t) {
        CHECK(r.sigma[t] == doctest::Approx(cs[2 * t]).epsilon(1e-10));
        CHECK(cs[2 * t] == doctest::Approx(cs[2 * t + 1]).epsilon(1e-8));
    }
}

TEST_CASE("Frobenius norm and rank are unitarily invariant") {
    Rng rng(36);
    const QMatrix A = random_qmatrix(6, 6, rng);
    // Draw unitary factors from the qsvd of an unrelated random matrix.
    const QsvdResult q1 = qsvd(random_qmatrix(6, 6, rng));
    const QsvdResult q2 = qsvd(random_qmatrix(6, 6, rng));
    const QMatrix B = qmatmul(q1.U, qmatmul(A, q2.V));
    CHECK(frobenius_norm(B) ==
          doctest::Approx(frobenius_norm(A)).epsilon(1e-10));

    const auto sa = qsvd(A).sigma;
    const auto sb = qsvd(B).sigma;
    for (std::size_t i = 0; i < sa.size(); ++i)
        CHECK(sa[i] == doctest::Approx(sb[i]).epsilon(1e-9));
    CHECK(rank_from_sigma(sa, 1e-10) == rank_from_sigma(sb, 1e-10));
}

TEST_CASE("qsvd rejects empty input") {
    CHECK_THROWS_AS(qsvd(QMatrix{}), ShapeError);
}
