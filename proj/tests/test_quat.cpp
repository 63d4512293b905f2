#include <doctest.h>

#include "qslr/quat.hpp"
#include "qslr/rng.hpp"

using namespace qslr;

namespace {

Quaternion random_quat(Rng& rng) {
    return {rng.normal(), rng.normal(), rng.normal(), rng.normal()};
}

double dist(const Quaternion& a, const Quaternion& b) {
    return modulus(a - b);
}

} // namespace

TEST_CASE("quaternion multiplication table") {
    const Quaternion one{1, 0, 0, 0}, i{0, 1, 0, 0}, j{0, 0, 1, 0},
        k{0, 0, 0, 1};

    CHECK(dist(i * j, k) == 0.0);
    CHECK(dist(j * i, -k) == 0.0);
    CHECK(dist(j * k, i) == 0.0);
    CHECK(dist(k * j, -i) == 0.0);
    CHECK(dist(k * i, j) == 0.0);
    CHECK(dist(i * k, -j) == 0.0);
    CHECK(dist(i * i, -one) == 0.0);
    CHECK(dist(j * j, -one) == 0.0);
    CHECK(dist(k * k, -one) == 0.0);

    const Quaternion q{2, 3, -1, 1};
    CHECK(dist(q * one, q) == 0.0);
    CHECK(dist(one * q, q) == 0.0);

    // (1+i)(1+j) = 1 + i + j + k
    CHECK(dist(Quaternion{1, 1, 0, 0} * Quaternion{1, 0, 1, 0},
               Quaternion{1, 1, 1, 1}) == 0.0);
}

TEST_CASE("conj / modulus / inverse") {
    CHECK(dist(conj(Quaternion{1, 1, 1, 1}), Quaternion{1, -1, -1, -1}) == 0.0);
    CHECK(modulus(Quaternion{1, 1, 1, 1}) == doctest::Approx(2.0));
    CHECK(dist(inverse(Quaternion::real(2.0)), Quaternion::real(0.5)) == 0.0);
    CHECK_THROWS_AS(inverse(Quaternion{}), DomainError);

    Rng rng(5);
    for (int t = 0; t < 50; ++t) {
        const Quaternion q = random_quat(rng);
        CHECK(dist(q * inverse(q), Quaternion::real(1.0)) < 1e-12);
        // |q1 q2| = |q1||q2|
        const Quaternion p = random_quat(rng);
        CHECK(modulus(q * p) ==
              doctest::Approx(modulus(q) * modulus(p)).epsilon(1e-12));
    }
}

TEST_CASE("Hamilton product associates and distributes") {
    Rng rng(6);
    for (int t = 0; t < 200; ++t) {
        const Quaternion a = random_quat(rng), b = random_quat(rng),
                         c = random_quat(rng);
        CHECK(dist((a * b) * c, a * (b * c)) < 1e-13 * (1.0 + modulus(a)) *
                                                   (1.0 + modulus(b)) *
                                                   (1.0 + modulus(c)));
        CHECK(dist(a * (b + c), a * b + a * c) < 1e-13 * (1.0 + modulus(a)) *
                                                     (1.0 + modulus(b) +
                                                      modulus(c)));
        CHECK(dist(conj(a * b), conj(b) * conj(a)) < 1e-13);
    }
}
