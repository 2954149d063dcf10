#ifndef CLAIR_RELAXATION_HPP
#define CLAIR_RELAXATION_HPP

#include "clair/partition.hpp"
#include "clair/sparse.hpp"

#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace clair {

enum class RelaxPattern { CFF, FFC, FOnly, Global };

enum class PointSubset { C, F, All };

template <typename Scalar>
struct RelaxConfig {
    Scalar weight = Scalar(1);
    RelaxPattern pattern = RelaxPattern::CFF;
    bool weighted_postsmoothing = true;
};

/// One weighted Jacobi sweep restricted to `points`:
/// x_i += weight * (b_i - (A x)_i) / a_ii, all residuals taken from the
/// incoming x. Entries of x outside `points` are untouched.
template <typename Scalar, typename VecX, typename VecB>
void jacobi_sweep(const SparseMatrix<Scalar>& A, Eigen::MatrixBase<VecX>& x, const Eigen::MatrixBase<VecB>& b,
                  Scalar weight, std::span<const int> points) {
    if (A.rows() != A.cols() || x.size() != A.cols() || b.size() != A.rows())
        throw DimensionError("jacobi_sweep: sizes do not conform");
    const int* outer = A.outerIndexPtr();
    const int* inner = A.innerIndexPtr();
    const Scalar* val = A.valuePtr();
    std::vector<Scalar> update(points.size());
    for (std::size_t p = 0; p < points.size(); ++p) {
        const int i = points[p];
        Scalar ax(0);
        Scalar diag(0);
        for (int k = outer[i]; k < outer[i + 1]; ++k) {
            ax += val[k] * x[inner[k]];
            if (inner[k] == i) diag = val[k];
        }
        if (diag == Scalar(0)) throw std::domain_error("jacobi_sweep: zero diagonal at row " + std::to_string(i));
        update[p] = weight * (b[i] - ax) / diag;
    }
    for (std::size_t p = 0; p < points.size(); ++p) x[points[p]] += update[p];
}

template <typename Scalar, typename VecX, typename VecB>
void jacobi_sweep(const SparseMatrix<Scalar>& A, Eigen::MatrixBase<VecX>& x, const Eigen::MatrixBase<VecB>& b,
                  Scalar weight, PointSubset subset, const CfSplitting& splitting) {
    switch (subset) {
    case PointSubset::C: jacobi_sweep(A, x, b, weight, std::span<const int>(splitting.c_points)); break;
    case PointSubset::F: jacobi_sweep(A, x, b, weight, std::span<const int>(splitting.f_points)); break;
    case PointSubset::All: {
        std::vector<int> all(static_cast<std::size_t>(A.rows()));
        std::iota(all.begin(), all.end(), 0);
        jacobi_sweep(A, x, b, weight, std::span<const int>(all));
        break;
    }
    }
}

/// C-sweep, then two F-sweeps; each stage sees the previous stage's result.
template <typename Scalar, typename VecX, typename VecB>
void cff_sweep(const SparseMatrix<Scalar>& A, Eigen::MatrixBase<VecX>& x, const Eigen::MatrixBase<VecB>& b,
               const CfSplitting& splitting, Scalar weight) {
    jacobi_sweep(A, x, b, weight, std::span<const int>(splitting.c_points));
    jacobi_sweep(A, x, b, weight, std::span<const int>(splitting.f_points));
    jacobi_sweep(A, x, b, weight, std::span<const int>(splitting.f_points));
}

/// Two F-sweeps, then a C-sweep (the adjoint ordering of cff_sweep).
template <typename Scalar, typename VecX, typename VecB>
void ffc_sweep(const SparseMatrix<Scalar>& A, Eigen::MatrixBase<VecX>& x, const Eigen::MatrixBase<VecB>& b,
               const CfSplitting& splitting, Scalar weight) {
    jacobi_sweep(A, x, b, weight, std::span<const int>(splitting.f_points));
    jacobi_sweep(A, x, b, weight, std::span<const int>(splitting.f_points));
    jacobi_sweep(A, x, b, weight, std::span<const int>(splitting.c_points));
}

template <typename Scalar, typename VecX, typename VecB>
void relax(const SparseMatrix<Scalar>& A, Eigen::MatrixBase<VecX>& x, const Eigen::MatrixBase<VecB>& b,
           const CfSplitting& splitting, Scalar weight, RelaxPattern pattern) {
    switch (pattern) {
    case RelaxPattern::CFF: cff_sweep(A, x, b, splitting, weight); break;
    case RelaxPattern::FFC: ffc_sweep(A, x, b, splitting, weight); break;
    case RelaxPattern::FOnly: jacobi_sweep(A, x, b, weight, std::span<const int>(splitting.f_points)); break;
    case RelaxPattern::Global: jacobi_sweep(A, x, b, weight, PointSubset::All, splitting); break;
    }
}

} // namespace clair

#endif
