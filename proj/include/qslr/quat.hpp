#pragma once

#include <cmath>

#include "qslr/errors.hpp"

namespace qslr {

/// A quaternion w + x*i + y*j + z*k over doubles. No hidden normalization:
/// modulus()^2 is exactly w^2+x^2+y^2+z^2.
struct Quaternion {
    double w = 0.0;
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr Quaternion() = default;
    constexpr Quaternion(double w_, double x_, double y_, double z_)
        : w(w_), x(x_), y(y_), z(z_) {}

    /// Real scalar embedded as w + 0i + 0j + 0k.
    static constexpr Quaternion real(double v) { return {v, 0.0, 0.0, 0.0}; }

    bool is_pure(double tol = 0.0) const { return std::abs(w) <= tol; }

    constexpr Quaternion operator-() const { return {-w, -x, -y, -z}; }

    Quaternion& operator+=(const Quaternion& o) {
        w += o.w; x += o.x; y += o.y; z += o.z;
        return *this;
    }
    Quaternion& operator-=(const Quaternion& o) {
        w -= o.w; x -= o.x; y -= o.y; z -= o.z;
        return *this;
    }
    Quaternion& operator*=(double s) {
        w *= s; x *= s; y *= s; z *= s;
        return *this;
    }
};

inline Quaternion operator+(Quaternion a, const Quaternion& b) {
    a += b;
    return a;
}
inline Quaternion operator-(Quaternion a, const Quaternion& b) {
    a -= b;
    return a;
}
inline Quaternion operator*(Quaternion a, double s) {
    a *= s;
    return a;
}
inline Quaternion operator*(double s, Quaternion a) {
    a *= s;
    return a;
}

/// Hamilton product; noncommutative (ij = -ji = k, jk = -kj = i, ki = -ik = j).
inline constexpr Quaternion qmul(const Quaternion& a, const Quaternion& b) {
    return {
        a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
        a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
        a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
        a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
    };
}

inline constexpr Quaternion operator*(const Quaternion& a, const Quaternion& b) {
    return qmul(a, b);
}

inline constexpr Quaternion conj(const Quaternion& q) {
    return {q.w, -q.x, -q.y, -q.z};
}

inline double modulus_sq(const Quaternion& q) {
    return q.w * q.w + q.x * q.x + q.y * q.y + q.z * q.z;
}

inline double modulus(const Quaternion& q) { return std::sqrt(modulus_sq(q)); }

/// conj(q) / |q|^2; the zero quaternion has no inverse.
inline Quaternion inverse(const Quaternion& q) {
    const double m2 = modulus_sq(q);
    if (m2 <= 0.0) throw DomainError("inverse of zero quaternion");
    return conj(q) * (1.0 / m2);
}

} // namespace qslr
