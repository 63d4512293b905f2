#include "qslr/kernels.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <cstring>

#include "qslr/errors.hpp"

namespace qslr::kernels {

namespace {

void axpby_scalar(double a, const double* x, double b, const double* y,
                  double* dst, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] = a * x[i] + b * y[i];
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

double dot_scalar(const double* x, const double* y, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
    return s;
}

double ssd_scalar(const double* x, const double* y, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = x[i] - y[i];
        s += d * d;
    }
    return s;
}

double huber_scalar(const double* const planes[4], double* const grads[4],
                    std::size_t n, double delta) {
    const double* w = planes[0];
    const double* x = planes[1];
    const double* y = planes[2];
    const double* z = planes[3];
    double value = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
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

void masked_div_scalar(double* u, const double* mask, double c0, double c1,
                       std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) u[i] /= (c0 + c1 * mask[i]);
}

void mask_mul_scalar(double* u, const double* mask, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) u[i] *= mask[i];
}

} // namespace

const Backend backend_scalar = {
    axpby_scalar, axpy_scalar, dot_scalar, ssd_scalar,
    huber_scalar, masked_div_scalar, mask_mul_scalar,
};

namespace {

bool cpu_has_avx2() {
#if defined(QSLR_COMPILE_AVX2)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Isa pick_default() {
    if (const char* env = std::getenv("QSLR_SIMD")) {
        if (std::strcmp(env, "scalar") == 0) return Isa::scalar;
        if (std::strcmp(env, "avx2") == 0) {
            if (!cpu_has_avx2())
                throw ConfigError("QSLR_SIMD=avx2 requested but AVX2 is unavailable");
            return Isa::avx2;
        }
        // anything else (including "auto") falls through to detection
    }
    return cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
}

std::atomic<Isa>& isa_slot() {
    static std::atomic<Isa> slot{pick_default()};
    return slot;
}

} // namespace

Isa active_isa() { return isa_slot().load(std::memory_order_relaxed); }

void force_isa(Isa isa) {
    if (isa == Isa::avx2 && !cpu_has_avx2())
        throw ConfigError("AVX2 path unavailable on this CPU/build");
    isa_slot().store(isa, std::memory_order_relaxed);
}

std::string isa_name() {
    return active_isa() == Isa::avx2 ? "avx2" : "scalar";
}

const Backend& active() {
#if defined(QSLR_COMPILE_AVX2)
    if (active_isa() == Isa::avx2) return backend_avx2;
#endif
    return backend_scalar;
}

} // namespace qslr::kernels
