#ifndef CLAIR_KERNELS_HPP
#define CLAIR_KERNELS_HPP

#include "clair/sparse.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace clair {

class SingularMatrixError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Pivots smaller than this times max|M| signal a singular matrix.
inline constexpr double kPivotTolerance = 1e-14;
/// Singular values below this times sigma_max are truncated in pseudoinverses.
inline constexpr double kPinvTolerance = 1e-12;

/// Partial-pivoting LU that refuses numerically singular input.
template <typename Scalar>
class LuFactor {
public:
    LuFactor() = default;

    explicit LuFactor(const DenseMatrix<Scalar>& M) {
        if (M.rows() != M.cols()) throw DimensionError("LuFactor: matrix is not square");
        const Scalar scale = M.size() ? M.cwiseAbs().maxCoeff() : Scalar(0);
        lu_.compute(M);
        const auto& packed = lu_.matrixLU();
        for (Eigen::Index k = 0; k < packed.rows(); ++k) {
            if (!(std::abs(packed(k, k)) >= Scalar(kPivotTolerance) * scale) || scale == Scalar(0))
                throw SingularMatrixError("LuFactor: pivot " + std::to_string(k) + " below tolerance");
        }
    }

    template <typename Rhs>
    auto solve(const Eigen::MatrixBase<Rhs>& rhs) const {
        return lu_.solve(rhs);
    }

    Eigen::Index size() const { return lu_.rows(); }

private:
    Eigen::PartialPivLU<DenseMatrix<Scalar>> lu_;
};

template <typename Scalar>
DenseMatrix<Scalar> lu_solve(const DenseMatrix<Scalar>& M, const DenseMatrix<Scalar>& rhs) {
    if (rhs.rows() != M.rows()) throw DimensionError("lu_solve: rhs rows");
    return LuFactor<Scalar>(M).solve(rhs);
}

/// Moore-Penrose pseudoinverse, truncating sigma < kPinvTolerance * sigma_max.
template <typename Scalar>
DenseMatrix<Scalar> pinv(const DenseMatrix<Scalar>& M) {
    if (M.size() == 0) return DenseMatrix<Scalar>::Zero(M.cols(), M.rows());
    Eigen::JacobiSVD<DenseMatrix<Scalar>> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    const Scalar cut = Scalar(kPinvTolerance) * (s.size() ? s[0] : Scalar(0));
    Vector<Scalar> inv(s.size());
    for (Eigen::Index k = 0; k < s.size(); ++k) inv[k] = (s[k] > cut && s[k] > Scalar(0)) ? Scalar(1) / s[k] : Scalar(0);
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

/// Minimum-norm least-squares solution of M x = rhs.
template <typename Scalar, typename Derived>
Vector<Scalar> min_norm_ls(const DenseMatrix<Scalar>& M, const Eigen::MatrixBase<Derived>& rhs) {
    if (rhs.size() != M.rows()) throw DimensionError("min_norm_ls: rhs size");
    if (M.size() == 0) return Vector<Scalar>::Zero(M.cols());
    Eigen::JacobiSVD<DenseMatrix<Scalar>> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(Scalar(kPinvTolerance));
    return svd.solve(Vector<Scalar>(rhs));
}

template <typename Scalar>
struct SvdResult {
    DenseMatrix<Scalar> U;
    Vector<Scalar> singular_values; // ascending
    DenseMatrix<Scalar> V;
};

/// Thin SVD with singular values sorted ascending (columns of U and V follow).
template <typename Scalar>
SvdResult<Scalar> svd(const DenseMatrix<Scalar>& M) {
    Eigen::BDCSVD<DenseMatrix<Scalar>> dec(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (dec.info() != Eigen::Success) throw ConvergenceError("svd: decomposition did not converge");
    return {dec.matrixU().rowwise().reverse(), dec.singularValues().reverse(), dec.matrixV().rowwise().reverse()};
}

/// Largest-magnitude Ritz value of an Arnoldi process on the operator
/// `apply` (y = Op x) of dimension n, started from the normalized all-ones
/// vector. On breakdown the smaller Hessenberg block is used.
template <typename Scalar, typename Apply>
Scalar arnoldi_spectral_radius(Eigen::Index n, Apply&& apply, int iters = 15) {
    if (iters < 1) throw std::invalid_argument("arnoldi_spectral_radius: iters must be >= 1");
    if (n == 0) return Scalar(0);
    const int m = static_cast<int>(std::min<Eigen::Index>(iters, n));
    DenseMatrix<Scalar> V(n, m + 1);
    DenseMatrix<Scalar> H = DenseMatrix<Scalar>::Zero(m + 1, m);
    V.col(0) = Vector<Scalar>::Ones(n) / std::sqrt(Scalar(n));
    int dim = m;
    for (int j = 0; j < m; ++j) {
        Vector<Scalar> w = apply(Vector<Scalar>(V.col(j)));
        const Scalar wnorm0 = w.norm();
        for (int i = 0; i <= j; ++i) {
            H(i, j) = V.col(i).dot(w);
            w -= H(i, j) * V.col(i);
        }
        // second Gram-Schmidt pass
        for (int i = 0; i <= j; ++i) {
            const Scalar c = V.col(i).dot(w);
            H(i, j) += c;
            w -= c * V.col(i);
        }
        H(j + 1, j) = w.norm();
        if (H(j + 1, j) <= Scalar(1e-12) * std::max(wnorm0, Scalar(1e-300))) {
            dim = j + 1;
            break;
        }
        V.col(j + 1) = w / H(j + 1, j);
    }
    Eigen::EigenSolver<DenseMatrix<Scalar>> es(H.topLeftCorner(dim, dim), false);
    if (es.info() != Eigen::Success) throw ConvergenceError("arnoldi_spectral_radius: Hessenberg eigensolve failed");
    Scalar rho(0);
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) rho = std::max(rho, std::abs(es.eigenvalues()[k]));
    return rho;
}

template <typename Scalar>
Scalar estimate_spectral_radius(const SparseMatrix<Scalar>& A, int iters = 15) {
    if (A.rows() != A.cols()) throw DimensionError("estimate_spectral_radius: matrix is not square");
    return arnoldi_spectral_radius<Scalar>(A.rows(), [&](const Vector<Scalar>& x) { return spmv(A, x); }, iters);
}

/// rho(D^{-1} A) without forming the scaled matrix.
template <typename Scalar>
Scalar estimate_jacobi_spectral_radius(const SparseMatrix<Scalar>& A, int iters = 15) {
    if (A.rows() != A.cols()) throw DimensionError("estimate_jacobi_spectral_radius: matrix is not square");
    const Vector<Scalar> dinv = diagonal(A).cwiseInverse();
    return arnoldi_spectral_radius<Scalar>(
        A.rows(), [&](const Vector<Scalar>& x) { return Vector<Scalar>(dinv.cwiseProduct(spmv(A, x))); }, iters);
}

} // namespace clair

#endif
