#include "qslr/qmatrix.hpp"

#include <cblas.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <ostream>

#include "qslr/errors.hpp"
#include "qslr/kernels.hpp"

namespace qslr {

QMatrix QMatrix::identity(std::size_t n) {
    QMatrix I(n, n);
    double* w = I.plane(0);
    for (std::size_t i = 0; i < n; ++i) w[i * n + i] = 1.0;
    return I;
}

QMatrix& QMatrix::operator+=(const QMatrix& o) {
    if (!same_shape(o)) throw ShapeError("QMatrix +=: shape mismatch");
    kernels::axpy(1.0, o.data(), data(), total());
    return *this;
}

QMatrix& QMatrix::operator-=(const QMatrix& o) {
    if (!same_shape(o)) throw ShapeError("QMatrix -=: shape mismatch");
    kernels::axpy(-1.0, o.data(), data(), total());
    return *this;
}

QMatrix& QMatrix::operator*=(double s) {
    for (auto& v : data_) v *= s;
    return *this;
}

QMatrix lincomb(double a, const QMatrix& X, double b, const QMatrix& Y) {
    if (!X.same_shape(Y)) throw ShapeError("lincomb: shape mismatch");
    QMatrix out(X.rows(), X.cols());
    kernels::axpby(a, X.data(), b, Y.data(), out.data(), out.total());
    return out;
}

double inner(const QMatrix& A, const QMatrix& B) {
    if (!A.same_shape(B)) throw ShapeError("inner: shape mismatch");
    return kernels::dot(A.data(), B.data(), A.total());
}

double frobenius_norm_sq(const QMatrix& A) {
    return kernels::dot(A.data(), A.data(), A.total());
}

double frobenius_norm(const QMatrix& A) { return std::sqrt(frobenius_norm_sq(A)); }

namespace {

// C(plane c) += sign * A(plane a) * B(plane b)
void gemm_acc(const QMatrix& A, int pa, const QMatrix& B, int pb, QMatrix& C,
              int pc, double sign, bool first) {
    const int m = static_cast<int>(A.rows());
    const int k = static_cast<int>(A.cols());
    const int n = static_cast<int>(B.cols());
    cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasNoTrans, m, n, k, sign,
                A.plane(pa), k, B.plane(pb), n, first ? 0.0 : 1.0, C.plane(pc), n);
}

} // namespace

QMatrix qmatmul(const QMatrix& A, const QMatrix& B) {
    if (A.cols() != B.rows()) throw ShapeError("qmatmul: inner dimensions differ");
    QMatrix C(A.rows(), B.cols());
    // Hamilton product expanded over component planes.
    // w = AwBw - AxBx - AyBy - AzBz
    gemm_acc(A, 0, B, 0, C, 0, +1.0, true);
    gemm_acc(A, 1, B, 1, C, 0, -1.0, false);
    gemm_acc(A, 2, B, 2, C, 0, -1.0, false);
    gemm_acc(A, 3, B, 3, C, 0, -1.0, false);
    // x = AwBx + AxBw + AyBz - AzBy
    gemm_acc(A, 0, B, 1, C, 1, +1.0, true);
    gemm_acc(A, 1, B, 0, C, 1, +1.0, false);
    gemm_acc(A, 2, B, 3, C, 1, +1.0, false);
    gemm_acc(A, 3, B, 2, C, 1, -1.0, false);
    // y = AwBy - AxBz + AyBw + AzBx
    gemm_acc(A, 0, B, 2, C, 2, +1.0, true);
    gemm_acc(A, 1, B, 3, C, 2, -1.0, false);
    gemm_acc(A, 2, B, 0, C, 2, +1.0, false);
    gemm_acc(A, 3, B, 1, C, 2, +1.0, false);
    // z = AwBz + AxBy - AyBx + AzBw
    gemm_acc(A, 0, B, 3, C, 3, +1.0, true);
    gemm_acc(A, 1, B, 2, C, 3, +1.0, false);
    gemm_acc(A, 2, B, 1, C, 3, -1.0, false);
    gemm_acc(A, 3, B, 0, C, 3, +1.0, false);
    return C;
}

QMatrix conj_transpose(const QMatrix& A) {
    QMatrix T(A.cols(), A.rows());
    const std::size_t r = A.rows(), c = A.cols();
    for (int p = 0; p < 4; ++p) {
        const double sign = (p == 0) ? 1.0 : -1.0;
        const double* src = A.plane(p);
        double* dst = T.plane(p);
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < c; ++j) dst[j * r + i] = sign * src[i * c + j];
    }
    return T;
}

namespace {

constexpr std::uint32_t kQmatVersion = 1;

void put_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) |
           (std::uint32_t(b[2]) << 16) | (std::uint32_t(b[3]) << 24);
}

} // namespace

void write_qmat(std::ostream& os, const QMatrix& A) {
    os.write("QMAT", 4);
    put_u32(os, kQmatVersion);
    put_u32(os, static_cast<std::uint32_t>(A.rows()));
    put_u32(os, static_cast<std::uint32_t>(A.cols()));
    // Planes are stored as raw doubles; this code assumes a little-endian
    // IEEE-754 host, which is checked at read time via the magic.
    os.write(reinterpret_cast<const char*>(A.data()),
             static_cast<std::streamsize>(A.total() * sizeof(double)));
    if (!os) throw IoError("write_qmat: stream failure");
}

void write_qmat(const std::string& path, const QMatrix& A) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("write_qmat: cannot open " + path);
    write_qmat(os, A);
}

QMatrix read_qmat(std::istream& is) {
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "QMAT", 4) != 0)
        throw IoError("read_qmat: bad magic");
    const std::uint32_t version = get_u32(is);
    if (version != kQmatVersion)
        throw IoError("read_qmat: unsupported version " + std::to_string(version));
    const std::uint32_t rows = get_u32(is);
    const std::uint32_t cols = get_u32(is);
    QMatrix A(rows, cols);
    is.read(reinterpret_cast<char*>(A.data()),
            static_cast<std::streamsize>(A.total() * sizeof(double)));
    if (!is) throw IoError("read_qmat: truncated payload");
    return A;
}

QMatrix read_qmat(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("read_qmat: cannot open " + path);
    return read_qmat(is);
}

} // namespace qslr
