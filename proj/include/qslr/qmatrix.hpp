#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "qslr/quat.hpp"

namespace qslr {

/// Dense m x n quaternion matrix stored as four real component planes
/// (w, x, y, z) in one contiguous buffer: plane-major, each plane row-major.
/// Elementwise arithmetic therefore runs as flat loops over 4*m*n doubles.
class QMatrix {
public:
    QMatrix() = default;
    QMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(4 * rows * cols, 0.0) {}

    static QMatrix zeros(std::size_t rows, std::size_t cols) {
        return QMatrix(rows, cols);
    }
    /// Identity embedded as a real diagonal of ones.
    static QMatrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t plane_size() const { return rows_ * cols_; }
    bool empty() const { return rows_ == 0 || cols_ == 0; }
    bool same_shape(const QMatrix& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_;
    }

    /// Component plane p in {0:w, 1:x, 2:y, 3:z}.
    double* plane(int p) { return data_.data() + std::size_t(p) * plane_size(); }
    const double* plane(int p) const {
        return data_.data() + std::size_t(p) * plane_size();
    }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::size_t total() const { return data_.size(); }

    Quaternion at(std::size_t i, std::size_t j) const {
        const std::size_t off = i * cols_ + j;
        const std::size_t ps = plane_size();
        return {data_[off], data_[ps + off], data_[2 * ps + off], data_[3 * ps + off]};
    }
    void set(std::size_t i, std::size_t j, const Quaternion& q) {
        const std::size_t off = i * cols_ + j;
        const std::size_t ps = plane_size();
        data_[off] = q.w;
        data_[ps + off] = q.x;
        data_[2 * ps + off] = q.y;
        data_[3 * ps + off] = q.z;
    }

    QMatrix& operator+=(const QMatrix& o);
    QMatrix& operator-=(const QMatrix& o);
    QMatrix& operator*=(double s);

    friend QMatrix operator+(QMatrix a, const QMatrix& b) { return a += b; }
    friend QMatrix operator-(QMatrix a, const QMatrix& b) { return a -= b; }
    friend QMatrix operator*(QMatrix a, double s) { return a *= s; }
    friend QMatrix operator*(double s, QMatrix a) { return a *= s; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// dst = a*X + b*Y over all planes.
QMatrix lincomb(double a, const QMatrix& X, double b, const QMatrix& Y);

/// Real inner product Re(tr(A* B)), i.e. the 4-plane dot product.
double inner(const QMatrix& A, const QMatrix& B);

double frobenius_norm_sq(const QMatrix& A);
double frobenius_norm(const QMatrix& A);

/// Quaternion matrix product via 16 real plane GEMMs.
QMatrix qmatmul(const QMatrix& A, const QMatrix& B);

QMatrix conj_transpose(const QMatrix& A);

/// Scale every entry on the left by a real factor (planes scaled uniformly).
inline QMatrix scaled(const QMatrix& A, double s) { return A * s; }

/// Binary serialization: 16-byte header (magic "QMAT", u32 version, u32 rows,
/// u32 cols) followed by the four planes as row-major little-endian f64.
void write_qmat(std::ostream& os, const QMatrix& A);
void write_qmat(const std::string& path, const QMatrix& A);
QMatrix read_qmat(std::istream& is);
QMatrix read_qmat(const std::string& path);

} // namespace qslr
