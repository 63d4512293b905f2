#include <doctest.h>

#include <sstream>

#include "qslr/qmatrix.hpp"
#include "test_support.hpp"

using namespace qslr;
using test::max_abs_diff;
using test::random_qmatrix;

TEST_CASE("qmatmul: identity and associativity") {
    Rng rng(21);
    const QMatrix A = random_qmatrix(5, 7, rng);
    CHECK(max_abs_diff(qmatmul(QMatrix::identity(5), A), A) == 0.0);
    CHECK(max_abs_diff(qmatmul(A, QMatrix::identity(7)), A) == 0.0);

    const QMatrix B = random_qmatrix(7, 4, rng);
    const QMatrix C = random_qmatrix(4, 6, rng);
    CHECK(max_abs_diff(qmatmul(qmatmul(A, B), C), qmatmul(A, qmatmul(B, C))) <
          1e-12);

    CHECK_THROWS_AS(qmatmul(A, A), ShapeError);
}

TEST_CASE("qmatmul agrees with scalar Hamilton products") {
    Rng rng(22);
    const QMatrix A = random_qmatrix(3, 4, rng);
    const QMatrix B = random_qmatrix(4, 2, rng);
    const QMatrix C = qmatmul(A, B);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 2; ++j) {
            Quaternion expect;
            for (std::size_t t = 0; t < 4; ++t)
                expect += qmul(A.at(i, t), B.at(t, j));
            CHECK(modulus(C.at(i, j) - expect) < 1e-13);
        }
}

TEST_CASE("conj_transpose is an involution and reverses products") {
    Rng rng(23);
    const QMatrix A = random_qmatrix(6, 3, rng);
    CHECK(max_abs_diff(conj_transpose(conj_transpose(A)), A) == 0.0);

    const QMatrix B = random_qmatrix(3, 5, rng);
    CHECK(max_abs_diff(conj_transpose(qmatmul(A, B)),
                       qmatmul(conj_transpose(B), conj_transpose(A))) < 1e-13);
}

TEST_CASE("inner product and Frobenius norm") {
    Rng rng(24);
    const QMatrix A = random_qmatrix(5, 5, rng);
    CHECK(inner(A, A) == doctest::Approx(frobenius_norm_sq(A)).epsilon(1e-14));

    // inner(A,B) = Re(tr(A* B))
    const QMatrix B = random_qmatrix(5, 5, rng);
    const QMatrix G = qmatmul(conj_transpose(A), B);
    double trace_re = 0.0;
    for (std::size_t i = 0; i < 5; ++i) trace_re += G.at(i, i).w;
    CHECK(inner(A, B) == doctest::Approx(trace_re).epsilon(1e-12));
}

TEST_CASE("QMAT serialization round trip is bit exact") {
    Rng rng(25);
    const QMatrix A = random_qmatrix(9, 4, rng);
    std::stringstream ss;
    write_qmat(ss, A);
    const QMatrix B = read_qmat(ss);
    REQUIRE(B.rows() == A.rows());
    REQUIRE(B.cols() == A.cols());
    CHECK(max_abs_diff(A, B) == 0.0);

    std::stringstream bad("QMXT");
    CHECK_THROWS_AS(read_qmat(bad), IoError);
}
