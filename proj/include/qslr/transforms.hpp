#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "qslr/qmatrix.hpp"

namespace qslr {

enum class TransformKind { QDCT, Identity };

TransformKind transform_kind_from_string(const std::string& s);
std::string to_string(TransformKind k);

/// Orthogonal analysis transform on quaternion matrices. QDCT is realized as
/// X -> D_m X D_n^T with D_k the orthonormal DCT-II matrix, i.e. the same
/// real transform applied to each component plane. Because the factors are
/// real orthogonal and two-sided, the transform preserves Frobenius norms and
/// singular values, and adjoint(forward(X)) == X.
class OrthoTransform {
public:
    OrthoTransform(TransformKind kind, std::size_t rows, std::size_t cols);

    TransformKind kind() const { return kind_; }
    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    QMatrix forward(const QMatrix& X) const;
    QMatrix adjoint(const QMatrix& W) const;

private:
    TransformKind kind_;
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> d_rows_; // D_m, row-major m x m
    std::vector<double> d_cols_; // D_n, row-major n x n
};

/// Orthonormal DCT-II matrix of size k (row-major): first row scaled by
/// sqrt(1/k), the others by sqrt(2/k).
std::vector<double> dct_matrix(std::size_t k);

} // namespace qslr
