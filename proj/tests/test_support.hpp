#pragma once

#include <cmath>
#include <vector>

#include "qslr/imaging.hpp"
#include "qslr/qmatrix.hpp"
#include "qslr/rng.hpp"

namespace qslr::test {

inline QMatrix random_qmatrix(std::size_t rows, std::size_t cols, Rng& rng,
                              double scale = 1.0) {
    QMatrix A(rows, cols);
    for (std::size_t i = 0; i < A.total(); ++i)
        A.data()[i] = scale * rng.normal();
    return A;
}

inline QMatrix random_pure_qmatrix(std::size_t rows, std::size_t cols, Rng& rng,
                                   double scale = 1.0) {
    QMatrix A = random_qmatrix(rows, cols, rng, scale);
    double* w = A.plane(0);
    for (std::size_t i = 0; i < A.plane_size(); ++i) w[i] = 0.0;
    return A;
}

inline double max_abs_diff(const QMatrix& a, const QMatrix& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.total(); ++i)
        m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

/// Low-rank pure-quaternion test image: sum of `rank` outer products of
/// smooth deterministic profiles, normalized into [lo, hi] per channel.
inline ColorImage synthetic_low_rank_image(std::size_t rows, std::size_t cols,
                                           int rank, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> r(rows * cols, 0.0), g(rows * cols, 0.0),
        b(rows * cols, 0.0);
    for (int t = 0; t < rank; ++t) {
        std::vector<double> u(rows), v(cols);
        const double fu = 0.5 + 2.0 * rng.uniform();
        const double fv = 0.5 + 2.0 * rng.uniform();
        const double pu = rng.uniform() * 2.0 * M_PI;
        const double pv = rng.uniform() * 2.0 * M_PI;
        for (std::size_t i = 0; i < rows; ++i)
            u[i] = std::sin(fu * 2.0 * M_PI * i / rows + pu);
        for (std::size_t j = 0; j < cols; ++j)
            v[j] = std::cos(fv * 2.0 * M_PI * j / cols + pv);
        const double cr = rng.uniform(), cg = rng.uniform(), cb = rng.uniform();
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j) {
                const double p = u[i] * v[j];
                r[i * cols + j] += cr * p;
                g[i * cols + j] += cg * p;
                b[i * cols + j] += cb * p;
            }
    }
    auto normalize = [](std::vector<double>& ch) {
        double lo = ch[0], hi = ch[0];
        for (double v : ch) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        const double span = hi - lo;
        for (double& v : ch) v = span > 0 ? 0.1 + 0.8 * (v - lo) / span : 0.5;
    };
    normalize(r);
    normalize(g);
    normalize(b);
    ColorImage img(rows, cols);
    img.r = r;
    img.g = g;
    img.b = b;
    return img;
}

/// Piecewise-smooth deterministic test image (gradients, discs, bars) used
/// as the bundled stand-in for a natural photograph at crop scale.
inline ColorImage synthetic_scene_image(std::size_t rows, std::size_t cols,
                                        int variant) {
    ColorImage img(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            const double y = static_cast<double>(i) / rows;
            const double x = static_cast<double>(j) / cols;
            double r = 0, g = 0, b = 0;
            switch (variant % 3) {
                case 0: { // smooth gradient + bright disc + dark bar
                    r = 0.2 + 0.6 * x;
                    g = 0.3 + 0.4 * y;
                    b = 0.5 + 0.3 * std::sin(2.0 * M_PI * (x + y));
                    const double dx = x - 0.6, dy = y - 0.35;
                    if (dx * dx + dy * dy < 0.04) {
                        r = 0.9;
                        g = 0.8;
                        b = 0.3;
                    }
                    if (y > 0.7 && y < 0.8) {
                        r *= 0.3;
                        g *= 0.3;
                        b *= 0.3;
                    }
                    break;
                }
                case 1: { // blocks with edges (roof/wall scene)
                    r = g = b = 0.65;
                    if (y < 0.4 + 0.2 * std::abs(x - 0.5)) {
                        r = 0.55;
                        g = 0.65;
                        b = 0.85; // sky
                    }
                    if (y > 0.45 && x > 0.25 && x < 0.75) {
                        r = 0.55;
                        g = 0.35;
                        b = 0.25; // wall
                    }
                    if (y > 0.55 && y < 0.75 && x > 0.4 && x < 0.52) {
                        r = 0.2;
                        g = 0.25;
                        b = 0.3; // window
                    }
                    break;
                }
                default: { // gentle texture with two color fields
                    const double t =
                        0.5 + 0.25 * std::sin(6.0 * M_PI * x) *
                                  std::cos(4.0 * M_PI * y);
                    r = x < 0.5 ? 0.7 * t + 0.2 : 0.4 * t + 0.1;
                    g = 0.5 * t + 0.25;
                    b = x < 0.5 ? 0.3 * t + 0.15 : 0.6 * t + 0.3;
                    break;
                }
            }
            const std::size_t off = i * cols + j;
            img.r[off] = std::clamp(r, 0.0, 1.0);
            img.g[off] = std::clamp(g, 0.0, 1.0);
            img.b[off] = std::clamp(b, 0.0, 1.0);
        }
    }
    return img;
}

} // namespace qslr::test
