// AVX2/FMA variants of the inner-loop kernels. Compiled with -mavx2 -mfma in
// this translation unit only; selection happens at runtime in kernels.cpp.

#include <immintrin.h>

#include <cmath>
#include <cstddef>

#include "qslr/kernels.hpp"

namespace qslr::kernels {

namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d swapped = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

void axpby_avx2(double a, const double* x, double b, const double* y,
                double* dst, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    const __m256d vb = _mm256_set1_pd(b);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vx = _mm256_loadu_pd(x + i);
        __m256d vy = _mm256_loadu_pd(y + i);
        _mm256_storeu_pd(dst + i, _mm256_fmadd_pd(va, vx, _mm256_mul_pd(vb, vy)));
    }
    for (; i < n; ++i) dst[i] = a * x[i] + b * y[i];
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vx = _mm256_loadu_pd(x + i);
        __m256d vy = _mm256_loadu_pd(y + i);
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, vx, vy));
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vx = _mm256_loadu_pd(x + i);
        __m256d vy = _mm256_loadu_pd(y + i);
        acc = _mm256_fmadd_pd(vx, vy, acc);
    }
    double s = hsum(acc);
    for (; i < n; ++i) s += x[i] * y[i];
    return s;
}

double ssd_avx2(const double* x, const double* y, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
        acc = _mm256_fmadd_pd(d, d, acc);
    }
    double s = hsum(acc);
    for (; i < n; ++i) {
        const double d = x[i] - y[i];
        s += d * d;
    }
    return s;
}

double huber_avx2(const double* const planes[4], double* const grads[4],
                  std::size_t n, double delta) {
    const double* w = planes[0];
    const double* x = planes[1];
    const double* y = planes[2];
    const double* z = planes[3];
    const __m256d vdelta = _mm256_set1_pd(delta);
    const __m256d vinvdelta = _mm256_set1_pd(1.0 / delta);
    const __m256d vhalfdelta = _mm256_set1_pd(0.5 * delta);
    const __m256d vone = _mm256_set1_pd(1.0);
    __m256d vvalue = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vw = _mm256_loadu_pd(w + i);
        __m256d vx = _mm256_loadu_pd(x + i);
        __m256d vy = _mm256_loadu_pd(y + i);
        __m256d vz = _mm256_loadu_pd(z + i);
        __m256d t2 = _mm256_mul_pd(vw, vw);
        t2 = _mm256_fmadd_pd(vx, vx, t2);
        t2 = _mm256_fmadd_pd(vy, vy, t2);
        t2 = _mm256_fmadd_pd(vz, vz, t2);
        __m256d t = _mm256_sqrt_pd(t2);
        __m256d small = _mm256_cmp_pd(t, vdelta, _CMP_LT_OQ);
        // value: t^2/(2 delta) on the quadratic branch, t - delta/2 on the
        // linear branch.  1/t on the linear branch only; lanes with t=0 take
        // the quadratic branch so the division never leaks through the blend.
        __m256d vq = _mm256_mul_pd(t2, _mm256_mul_pd(_mm256_set1_pd(0.5), vinvdelta));
        __m256d vl = _mm256_sub_pd(t, vhalfdelta);
        vvalue = _mm256_add_pd(vvalue, _mm256_blendv_pd(vl, vq, small));
        if (grads[0]) {
            __m256d invt = _mm256_div_pd(vone, t);
            __m256d factor = _mm256_blendv_pd(invt, vinvdelta, small);
            _mm256_storeu_pd(grads[0] + i, _mm256_mul_pd(vw, factor));
            _mm256_storeu_pd(grads[1] + i, _mm256_mul_pd(vx, factor));
            _mm256_storeu_pd(grads[2] + i, _mm256_mul_pd(vy, factor));
            _mm256_storeu_pd(grads[3] + i, _mm256_mul_pd(vz, factor));
        }
    }
    double value = hsum(vvalue);
    for (; i < n; ++i) {
        const double t2 = w[i] * w[i] + x[i] * x[i] + y[i] * y[i] + z[i] * z[i];
        const double t = std::sqrt(t2);
        double factor;
        if (t < delta) {
            value += t2 / (2.0 * delta);
            factor = 1.0 / delta;
        } else {
            value += t - 0.5 * delta;
            factor = 1.0 / t;
        }
        if (grads[0]) {
            grads[0][i] = w[i] * factor;
            grads[1][i] = x[i] * factor;
            grads[2][i] = y[i] * factor;
            grads[3][i] = z[i] * factor;
        }
    }
    return value;
}

void masked_div_avx2(double* u, const double* mask, double c0, double c1,
                     std::size_t n) {
    const __m256d vc0 = _mm256_set1_pd(c0);
    const __m256d vc1 = _mm256_set1_pd(c1);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vm = _mm256_loadu_pd(mask + i);
        __m256d denom = _mm256_fmadd_pd(vc1, vm, vc0);
        _mm256_storeu_pd(u + i, _mm256_div_pd(_mm256_loadu_pd(u + i), denom));
    }
    for (; i < n; ++i) u[i] /= (c0 + c1 * mask[i]);
}

void mask_mul_avx2(double* u, const double* mask, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(u + i, _mm256_mul_pd(_mm256_loadu_pd(u + i),
                                              _mm256_loadu_pd(mask + i)));
    }
    for (; i < n; ++i) u[i] *= mask[i];
}

} // namespace

const Backend backend_avx2 = {
    axpby_avx2, axpy_avx2, dot_avx2, ssd_avx2,
    huber_avx2, masked_div_avx2, mask_mul_avx2,
};

} // namespace qslr::kernels
