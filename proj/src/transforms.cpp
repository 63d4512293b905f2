#include "qslr/transforms.hpp"

#include <cblas.h>

#include <cmath>

#include "qslr/errors.hpp"

namespace qslr {

TransformKind transform_kind_from_string(const std::string& s) {
    if (s == "qdct") return TransformKind::QDCT;
    if (s == "identity") return TransformKind::Identity;
    throw ConfigError("unknown transform kind: " + s);
}

std::string to_string(TransformKind k) {
    return k == TransformKind::QDCT ? "qdct" : "identity";
}

std::vector<double> dct_matrix(std::size_t k) {
    std::vector<double> D(k * k);
    const double c0 = std::sqrt(1.0 / static_cast<double>(k));
    const double c = std::sqrt(2.0 / static_cast<double>(k));
    for (std::size_t j = 0; j < k; ++j) {
        const double scale = (j == 0) ? c0 : c;
        for (std::size_t i = 0; i < k; ++i) {
            D[j * k + i] =
                scale * std::cos(M_PI * (2.0 * i + 1.0) * j / (2.0 * k));
        }
    }
    return D;
}

OrthoTransform::OrthoTransform(TransformKind kind, std::size_t rows,
                               std::size_t cols)
    : kind_(kind), rows_(rows), cols_(cols) {
    if (rows == 0 || cols == 0)
        throw ShapeError("OrthoTransform: empty dimensions");
    if (kind_ == TransformKind::QDCT) {
        d_rows_ = dct_matrix(rows);
        d_cols_ = dct_matrix(cols);
    }
}

namespace {

// out = op(D_m) * P * op(D_n)^T per plane, all row-major.
QMatrix two_sided(const QMatrix& X, const std::vector<double>& Dm,
                  const std::vector<double>& Dn, bool transpose_factors) {
    const int m = static_cast<int>(X.rows());
    const int n = static_cast<int>(X.cols());
    QMatrix out(X.rows(), X.cols());
    std::vector<double> tmp(X.plane_size());
    const CBLAS_TRANSPOSE left = transpose_factors ? CblasTrans : CblasNoTrans;
    const CBLAS_TRANSPOSE right = transpose_factors ? CblasNoTrans : CblasTrans;
    for (int p = 0; p < 4; ++p) {
        // tmp = op(D_m) * plane
        cblas_dgemm(CblasRowMajor, left, CblasNoTrans, m, n, m, 1.0, Dm.data(),
                    m, X.plane(p), n, 0.0, tmp.data(), n);
        // out = tmp * op(D_n)^T
        cblas_dgemm(CblasRowMajor, CblasNoTrans, right, m, n, n, 1.0, tmp.data(),
                    n, Dn.data(), n, 0.0, out.plane(p), n);
    }
    return out;
}

} // namespace

QMatrix OrthoTransform::forward(const QMatrix& X) const {
    if (X.rows() != rows_ || X.cols() != cols_)
        throw ShapeError("OrthoTransform::forward: shape mismatch");
    if (kind_ == TransformKind::Identity) return X;
    return two_sided(X, d_rows_, d_cols_, /*transpose_factors=*/false);
}

QMatrix OrthoTransform::adjoint(const QMatrix& W) const {
    if (W.rows() != rows_ || W.cols() != cols_)
        throw ShapeError("OrthoTransform::adjoint: shape mismatch");
    if (kind_ == TransformKind::Identity) return W;
    return two_sided(W, d_rows_, d_cols_, /*transpose_factors=*/true);
}

} // namespace qslr
