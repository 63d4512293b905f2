#pragma once

#include <cstddef>
#include <string>

// Data-parallel inner loops shared by the matrix and solver code. Every
// operation has a scalar reference implementation and, on x86-64, an AVX2
// variant selected at runtime. The two paths are equivalence-tested; the
// scalar path is the semantic reference.

namespace qslr::kernels {

enum class Isa { scalar, avx2 };

/// Instruction set selected for this process (env QSLR_SIMD=scalar|avx2|auto
/// overrides the cpuid-based default).
Isa active_isa();

/// Force a specific path; throws ConfigError if unsupported on this CPU.
void force_isa(Isa isa);

/// Name of the active path ("scalar" or "avx2").
std::string isa_name();

struct Backend {
    // dst[i] = a*x[i] + b*y[i]
    void (*axpby)(double a, const double* x, double b, const double* y,
                  double* dst, std::size_t n);
    // y[i] += a*x[i]
    void (*axpy)(double a, const double* x, double* y, std::size_t n);
    // sum x[i]*y[i]
    double (*dot)(const double* x, const double* y, std::size_t n);
    // sum (x[i]-y[i])^2
    double (*ssd)(const double* x, const double* y, std::size_t n);
    // Huber value/gradient on quaternion entries given as four parallel
    // planes: t = |q_i|, value += t<delta ? t^2/(2 delta) : t - delta/2,
    // grad_i = q_i * (t<delta ? 1/delta : 1/t).  Returns the summed value.
    double (*huber)(const double* const planes[4], double* const grads[4],
                    std::size_t n, double delta);
    // u[i] /= (c0 + c1*mask[i])
    void (*masked_div)(double* u, const double* mask, double c0, double c1,
                       std::size_t n);
    // u[i] *= mask[i]
    void (*mask_mul)(double* u, const double* mask, std::size_t n);
};

extern const Backend backend_scalar;
#if defined(QSLR_COMPILE_AVX2)
extern const Backend backend_avx2;
#endif

const Backend& active();

inline void axpby(double a, const double* x, double b, const double* y,
                  double* dst, std::size_t n) {
    active().axpby(a, x, b, y, dst, n);
}
inline void axpy(double a, const double* x, double* y, std::size_t n) {
    active().axpy(a, x, y, n);
}
inline double dot(const double* x, const double* y, std::size_t n) {
    return active().dot(x, y, n);
}
inline double ssd(const double* x, const double* y, std::size_t n) {
    return active().ssd(x, y, n);
}
inline double huber(const double* const planes[4], double* const grads[4],
                    std::size_t n, double delta) {
    return active().huber(planes, grads, n, delta);
}
inline void masked_div(double* u, const double* mask, double c0, double c1,
                       std::size_t n) {
    active().masked_div(u, mask, c0, c1, n);
}
inline void mask_mul(double* u, const double* mask, std::size_t n) {
    active().mask_mul(u, mask, n);
}

} // namespace qslr::kernels
