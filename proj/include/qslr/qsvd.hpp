#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "qslr/qmatrix.hpp"

namespace qslr {

/// Dense complex matrix, column-major (LAPACK layout).
struct CMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::complex<double>> data;

    CMatrix() = default;
    CMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c) {}

    std::complex<double>& at(std::size_t i, std::size_t j) {
        return data[j * rows + i];
    }
    const std::complex<double>& at(std::size_t i, std::size_t j) const {
        return data[j * rows + i];
    }
};

/// Entrywise complex-adjoint embedding: q = w+xi+yj+zk maps to the 2x2 block
///   [ w+xi   y+zi ]
///   [ -y+zi  w-xi ]
/// placed at rows 2r..2r+1, cols 2c..2c+1. The map is a *-homomorphism, so
/// singular values of the embedding are those of the quaternion matrix, each
/// with multiplicity doubled.
CMatrix to_complex_adjoint(const QMatrix& A);

/// Inverse of the embedding. Rejects matrices violating the block symmetry
/// (relative to the largest entry) beyond `tol`.
QMatrix from_complex_adjoint(const CMatrix& M, double tol = 1e-10);

/// Singular values of a general complex matrix (descending).
std::vector<double> complex_singular_values(const CMatrix& M);

struct QsvdOptions {
    double tol_unitary = 1e-8;
    double tol_recon = 1e-8;
    /// Adjacent singular values of the adjoint must pair up to this relative
    /// tolerance; a larger gap means the embedding is broken.
    double pair_tol = 1e-8;
    /// Verify unitarity/reconstruction invariants before returning.
    bool verify = true;
};

struct QsvdResult {
    QMatrix U;                 // m x m unitary (m x k in thin form)
    std::vector<double> sigma; // length min(m,n), nonincreasing, >= 0
    QMatrix V;                 // n x n unitary (n x k in thin form)
};

/// Quaternion SVD via the complex adjoint: A = U diag(sigma) V*.
QsvdResult qsvd(const QMatrix& A, const QsvdOptions& opts = {});

/// Economy variant: U is m x k and V is n x k with k = min(m,n). Used in the
/// solver hot path where the square completions are never touched.
QsvdResult qsvd_thin(const QMatrix& A, const QsvdOptions& opts = {});

/// Singular values only (descending), no factor recovery.
std::vector<double> qsvd_values(const QMatrix& A);

/// Number of singular values above `tol`.
std::size_t rank_from_sigma(const std::vector<double>& sigma, double tol);

/// U diag(sigma) V* with thin or full factors.
QMatrix qsvd_reconstruct(const QsvdResult& r);

} // namespace qslr
