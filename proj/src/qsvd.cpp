#include "qslr/qsvd.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qslr/errors.hpp"

namespace qslr {

CMatrix to_complex_adjoint(const QMatrix& A) {
    const std::size_t m = A.rows(), n = A.cols();
    CMatrix M(2 * m, 2 * n);
    const double* w = A.plane(0);
    const double* x = A.plane(1);
    const double* y = A.plane(2);
    const double* z = A.plane(3);
    for (std::size_t r = 0; r < m; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            const std::size_t off = r * n + c;
            const std::complex<double> alpha(w[off], x[off]);
            const std::complex<double> beta(y[off], z[off]);
            M.at(2 * r, 2 * c) = alpha;
            M.at(2 * r, 2 * c + 1) = beta;
            M.at(2 * r + 1, 2 * c) = -std::conj(beta);
            M.at(2 * r + 1, 2 * c + 1) = std::conj(alpha);
        }
    }
    return M;
}

QMatrix from_complex_adjoint(const CMatrix& M, double tol) {
    if (M.rows % 2 != 0 || M.cols % 2 != 0)
        throw ShapeError("from_complex_adjoint: dimensions must be even");
    const std::size_t m = M.rows / 2, n = M.cols / 2;
    double scale = 0.0;
    for (const auto& v : M.data) scale = std::max(scale, std::abs(v));
    const double bound = tol * std::max(scale, 1.0);
    QMatrix A(m, n);
    for (std::size_t r = 0; r < m; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            const auto alpha = M.at(2 * r, 2 * c);
            const auto beta = M.at(2 * r, 2 * c + 1);
            if (std::abs(M.at(2 * r + 1, 2 * c + 1) - std::conj(alpha)) > bound ||
                std::abs(M.at(2 * r + 1, 2 * c) + std::conj(beta)) > bound) {
                std::ostringstream oss;
                oss << "from_complex_adjoint: block symmetry violated at (" << r
                    << "," << c << ")";
                throw NumericalError(oss.str());
            }
            A.set(r, c, {alpha.real(), alpha.imag(), beta.real(), beta.imag()});
        }
    }
    return A;
}

namespace {

struct ComplexSvd {
    std::vector<double> s;
    CMatrix U;  // rows x k
    CMatrix VT; // k x cols
};

ComplexSvd complex_svd_economy(CMatrix M) {
    const lapack_int rows = static_cast<lapack_int>(M.rows);
    const lapack_int cols = static_cast<lapack_int>(M.cols);
    const lapack_int k = std::min(rows, cols);
    ComplexSvd out;
    out.s.resize(static_cast<std::size_t>(k));
    out.U = CMatrix(M.rows, static_cast<std::size_t>(k));
    out.VT = CMatrix(static_cast<std::size_t>(k), M.cols);
    const lapack_int info = LAPACKE_zgesdd(
        LAPACK_COL_MAJOR, 'S', rows, cols,
        reinterpret_cast<lapack_complex_double*>(M.data.data()), rows,
        out.s.data(),
        reinterpret_cast<lapack_complex_double*>(out.U.data.data()), rows,
        reinterpret_cast<lapack_complex_double*>(out.VT.data.data()), k);
    if (info != 0) {
        std::ostringstream oss;
        oss << "zgesdd failed (info=" << info << ", size " << rows << "x" << cols
            << ")";
        throw NumericalError(oss.str());
    }
    return out;
}

// Pull quaternion column t out of an adjoint-shaped complex column: rows
// (2r, 2r+1) carry (alpha_r, -conj(beta_r)) of the quaternion entry
// alpha_r + beta_r j.
void extract_column(const CMatrix& M, std::size_t src_col, QMatrix& dst,
                    std::size_t dst_col) {
    const std::size_t m = dst.rows();
    for (std::size_t r = 0; r < m; ++r) {
        const auto a = M.at(2 * r, src_col);
        const auto nb = M.at(2 * r + 1, src_col); // equals -conj(beta)
        dst.set(r, dst_col,
                {a.real(), a.imag(), -nb.real(), nb.imag()});
    }
}

Quaternion col_inner(const QMatrix& M, std::size_t c1, std::size_t c2) {
    Quaternion s;
    for (std::size_t r = 0; r < M.rows(); ++r)
        s += qmul(conj(M.at(r, c1)), M.at(r, c2));
    return s;
}

double col_norm(const QMatrix& M, std::size_t c) {
    double s = 0.0;
    for (std::size_t r = 0; r < M.rows(); ++r) s += modulus_sq(M.at(r, c));
    return std::sqrt(s);
}

void col_scale(QMatrix& M, std::size_t c, double s) {
    for (std::size_t r = 0; r < M.rows(); ++r) M.set(r, c, M.at(r, c) * s);
}

// col_dst -= col_src * q (right scalar multiplication keeps quaternionic spans)
void col_sub_right(QMatrix& M, std::size_t dst, std::size_t src,
                   const Quaternion& q) {
    for (std::size_t r = 0; r < M.rows(); ++r)
        M.set(r, dst, M.at(r, dst) - qmul(M.at(r, src), q));
}

void project_out_previous(QMatrix& M, std::size_t j) {
    for (int pass = 0; pass < 2; ++pass)
        for (std::size_t i = 0; i < j; ++i)
            col_sub_right(M, j, i, col_inner(M, i, j));
}

void set_canonical(QMatrix& M, std::size_t j, std::size_t seed) {
    for (std::size_t r = 0; r < M.rows(); ++r) M.set(r, j, {});
    M.set(seed, j, {1.0, 0.0, 0.0, 0.0});
}

// Orthonormalize column j against columns [0, j) by modified Gram-Schmidt in
// quaternion arithmetic. If the column collapses, fall back to the canonical
// seed with the largest residual (at least one has residual^2 >= (m-j)/m).
void mgs_fix_column(QMatrix& M, std::size_t j) {
    const std::size_t m = M.rows();
    project_out_previous(M, j);
    double nrm = col_norm(M, j);
    if (nrm < 0.1) {
        std::size_t best_seed = 0;
        double best_nrm = -1.0;
        for (std::size_t seed = 0; seed < m; ++seed) {
            set_canonical(M, j, seed);
            project_out_previous(M, j);
            const double cand = col_norm(M, j);
            if (cand > best_nrm) {
                best_nrm = cand;
                best_seed = seed;
            }
        }
        set_canonical(M, j, best_seed);
        project_out_previous(M, j);
        nrm = col_norm(M, j);
        if (nrm <= 0.0)
            throw NumericalError("qsvd: failed to complete an orthonormal basis");
    }
    col_scale(M, j, 1.0 / nrm);
    // One more sweep keeps the basis orthonormal to machine precision even
    // when the residual was small.
    project_out_previous(M, j);
    nrm = col_norm(M, j);
    col_scale(M, j, 1.0 / nrm);
}

double unitarity_defect(const QMatrix& U) {
    const QMatrix G = qmatmul(conj_transpose(U), U);
    QMatrix I = QMatrix::identity(G.rows());
    return frobenius_norm(G - I);
}

QsvdResult qsvd_impl(const QMatrix& A, const QsvdOptions& opts, bool full) {
    if (A.empty()) throw ShapeError("qsvd: empty matrix");
    const std::size_t m = A.rows(), n = A.cols();
    const std::size_t k = std::min(m, n);

    ComplexSvd svd = complex_svd_economy(to_complex_adjoint(A));

    const double smax = svd.s.empty() ? 0.0 : svd.s.front();
    // The adjoint has every singular value twice; adjacent values must agree.
    for (std::size_t t = 0; t < k; ++t) {
        const double a = svd.s[2 * t], b = svd.s[2 * t + 1];
        if (std::abs(a - b) > opts.pair_tol * std::max(smax, 1e-300)) {
            std::ostringstream oss;
            oss << "qsvd: singular values of the complex adjoint do not pair ("
                << a << " vs " << b << " at position " << t << ")";
            throw NumericalError(oss.str());
        }
    }

    QsvdResult res;
    res.sigma.resize(k);
    for (std::size_t t = 0; t < k; ++t) res.sigma[t] = svd.s[2 * t];

    res.U = QMatrix(m, full ? m : k);
    res.V = QMatrix(n, full ? n : k);
    for (std::size_t t = 0; t < k; ++t) {
        extract_column(svd.U, 2 * t, res.U, t);
        // Row 2t of VT is the conjugate of column 2t of V; conjugating the
        // row recovers the adjoint-shaped column.
        CMatrix vcol(2 * n, 1);
        for (std::size_t r = 0; r < 2 * n; ++r)
            vcol.at(r, 0) = std::conj(svd.VT.at(2 * t, r));
        extract_column(vcol, 0, res.V, t);
    }

    // Degenerate clusters: the complex SVD may mix the two copies of a
    // repeated singular value arbitrarily, which breaks quaternion
    // orthonormality of the extracted columns. Re-orthonormalize V inside
    // each positive cluster and rebuild the matching U columns as A v / s.
    const double cluster_tol = 1e-7 * std::max(smax, 1e-300);
    const double zero_tol = 1e-12 * std::max(smax, 1e-300);
    std::size_t t = 0;
    while (t < k) {
        std::size_t e = t + 1;
        while (e < k && std::abs(res.sigma[e - 1] - res.sigma[e]) <= cluster_tol)
            ++e;
        if (res.sigma[t] > zero_tol && e - t > 1) {
            for (std::size_t j = t; j < e; ++j) {
                for (int pass = 0; pass < 2; ++pass)
                    for (std::size_t i = t; i < j; ++i)
                        col_sub_right(res.V, j, i, col_inner(res.V, i, j));
                const double nrm = col_norm(res.V, j);
                if (nrm < 0.5)
                    throw NumericalError("qsvd: degenerate cluster collapse");
                col_scale(res.V, j, 1.0 / nrm);
            }
            // u_j = A v_j / s_j stays consistent with the repaired V block.
            QMatrix Vblock(n, e - t);
            for (std::size_t j = t; j < e; ++j)
                for (std::size_t r = 0; r < n; ++r)
                    Vblock.set(r, j - t, res.V.at(r, j));
            const QMatrix Ublock = qmatmul(A, Vblock);
            for (std::size_t j = t; j < e; ++j)
                for (std::size_t r = 0; r < m; ++r)
                    res.U.set(r, j, Ublock.at(r, j - t) * (1.0 / res.sigma[j]));
        } else if (res.sigma[t] <= zero_tol) {
            // Null-space columns only need orthonormality.
            for (std::size_t j = t; j < e; ++j) {
                mgs_fix_column(res.U, j);
                mgs_fix_column(res.V, j);
            }
        }
        t = e;
    }

    if (full) {
        for (std::size_t j = k; j < m; ++j) mgs_fix_column(res.U, j);
        for (std::size_t j = k; j < n; ++j) mgs_fix_column(res.V, j);
    }

    if (opts.verify) {
        const double du = unitarity_defect(res.U);
        const double dv = unitarity_defect(res.V);
        if (du > opts.tol_unitary || dv > opts.tol_unitary) {
            std::ostringstream oss;
            oss << "qsvd: unitary factors out of tolerance (U defect " << du
                << ", V defect " << dv << ")";
            throw NumericalError(oss.str());
        }
        const double anorm = frobenius_norm(A);
        const double drec = frobenius_norm(A - qsvd_reconstruct(res));
        if (drec > opts.tol_recon * std::max(anorm, 1e-300)) {
            std::ostringstream oss;
            oss << "qsvd: reconstruction residual " << drec << " exceeds "
                << opts.tol_recon << " * ||A|| (" << anorm << ")";
            throw NumericalError(oss.str());
        }
    }
    return res;
}

} // namespace

std::vector<double> complex_singular_values(const CMatrix& M) {
    CMatrix copy = M;
    const lapack_int rows = static_cast<lapack_int>(M.rows);
    const lapack_int cols = static_cast<lapack_int>(M.cols);
    std::vector<double> s(static_cast<std::size_t>(std::min(rows, cols)));
    const lapack_int info = LAPACKE_zgesdd(
        LAPACK_COL_MAJOR, 'N', rows, cols,
        reinterpret_cast<lapack_complex_double*>(copy.data.data()), rows,
        s.data(), nullptr, 1, nullptr, 1);
    if (info != 0)
        throw NumericalError("zgesdd (values only) failed, info=" +
                             std::to_string(info));
    return s;
}

std::vector<double> qsvd_values(const QMatrix& A) {
    if (A.empty()) throw ShapeError("qsvd_values: empty matrix");
    const std::vector<double> s = complex_singular_values(to_complex_adjoint(A));
    std::vector<double> sigma(std::min(A.rows(), A.cols()));
    for (std::size_t t = 0; t < sigma.size(); ++t) sigma[t] = s[2 * t];
    return sigma;
}

QsvdResult qsvd(const QMatrix& A, const QsvdOptions& opts) {
    return qsvd_impl(A, opts, /*full=*/true);
}

QsvdResult qsvd_thin(const QMatrix& A, const QsvdOptions& opts) {
    return qsvd_impl(A, opts, /*full=*/false);
}

std::size_t rank_from_sigma(const std::vector<double>& sigma, double tol) {
    std::size_t r = 0;
    for (double s : sigma)
        if (s > tol) ++r;
    return r;
}

QMatrix qsvd_reconstruct(const QsvdResult& r) {
    const std::size_t m = r.U.rows(), n = r.V.rows();
    const std::size_t k = r.sigma.size();
    // Scale the first k columns of U by sigma, then multiply by V*.
    QMatrix Uk(m, k);
    for (std::size_t t = 0; t < k; ++t)
        for (std::size_t i = 0; i < m; ++i)
            Uk.set(i, t, r.U.at(i, t) * r.sigma[t]);
    QMatrix Vk(n, k);
    for (std::size_t t = 0; t < k; ++t)
        for (std::size_t i = 0; i < n; ++i) Vk.set(i, t, r.V.at(i, t));
    return qmatmul(Uk, conj_transpose(Vk));
}

} // namespace qslr
