#ifndef CLAIR_SPARSE_HPP
#define CLAIR_SPARSE_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace clair {

/// Compressed-sparse-row matrix. Canonical form: sorted column indices per
/// row, compressed storage, no explicit zeros.
template <typename Scalar>
using SparseMatrix = Eigen::SparseMatrix<Scalar, Eigen::RowMajor, int>;

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Triplet = Eigen::Triplet<Scalar, int>;

using SparseMatrixd = SparseMatrix<double>;
using DenseMatrixd = DenseMatrix<double>;
using Vectord = Vector<double>;

class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

namespace detail {

inline void require_dims(bool ok, const char* what) {
    if (!ok) throw DimensionError(std::string("dimension mismatch in ") + what);
}

template <typename Scalar>
bool rows_sorted(const SparseMatrix<Scalar>& A) {
    const int* outer = A.outerIndexPtr();
    const int* inner = A.innerIndexPtr();
    for (int i = 0; i < A.rows(); ++i)
        for (int k = outer[i] + 1; k < outer[i + 1]; ++k)
            if (inner[k - 1] >= inner[k]) return false;
    return true;
}

} // namespace detail

/// Strictly increasing column indices in every row and no stored zeros.
template <typename Scalar>
bool is_canonical(const SparseMatrix<Scalar>& A) {
    if (!A.isCompressed()) return false;
    if (!detail::rows_sorted(A)) return false;
    const Scalar* v = A.valuePtr();
    for (Eigen::Index k = 0; k < A.nonZeros(); ++k)
        if (v[k] == Scalar(0)) return false;
    return true;
}

template <typename Scalar>
void canonicalize(SparseMatrix<Scalar>& A) {
    A.makeCompressed();
    if (!detail::rows_sorted(A)) {
        std::vector<Triplet<Scalar>> trip;
        trip.reserve(static_cast<std::size_t>(A.nonZeros()));
        for (int i = 0; i < A.outerSize(); ++i)
            for (typename SparseMatrix<Scalar>::InnerIterator it(A, i); it; ++it)
                trip.emplace_back(it.row(), it.col(), it.value());
        SparseMatrix<Scalar> B(A.rows(), A.cols());
        B.setFromTriplets(trip.begin(), trip.end());
        A = std::move(B);
    }
    A.prune([](int, int, const Scalar& v) { return v != Scalar(0); });
    A.makeCompressed();
}

/// Assembles from (row, col, value) entries; duplicates are summed.
template <typename Scalar>
SparseMatrix<Scalar> from_triplets(int n_rows, int n_cols, const std::vector<Triplet<Scalar>>& entries) {
    SparseMatrix<Scalar> A(n_rows, n_cols);
    A.setFromTriplets(entries.begin(), entries.end());
    canonicalize(A);
    return A;
}

template <typename Scalar>
SparseMatrix<Scalar> identity(int n) {
    SparseMatrix<Scalar> I(n, n);
    I.setIdentity();
    I.makeCompressed();
    return I;
}

template <typename Scalar, typename Derived>
Vector<Scalar> spmv(const SparseMatrix<Scalar>& A, const Eigen::MatrixBase<Derived>& x) {
    detail::require_dims(x.size() == A.cols(), "spmv");
    Vector<Scalar> y(A.rows());
    const int* outer = A.outerIndexPtr();
    const int* inner = A.innerIndexPtr();
    const Scalar* val = A.valuePtr();
    for (int i = 0; i < A.rows(); ++i) {
        Scalar s(0);
        for (int k = outer[i]; k < outer[i + 1]; ++k) s += val[k] * x[inner[k]];
        y[i] = s;
    }
    return y;
}

template <typename Scalar>
SparseMatrix<Scalar> transpose(const SparseMatrix<Scalar>& A) {
    SparseMatrix<Scalar> T = A.transpose();
    canonicalize(T);
    return T;
}

template <typename Scalar>
SparseMatrix<Scalar> matmul(const SparseMatrix<Scalar>& A, const SparseMatrix<Scalar>& B) {
    detail::require_dims(A.cols() == B.rows(), "matmul");
    SparseMatrix<Scalar> C = A * B;
    canonicalize(C);
    return C;
}

/// Galerkin coarse operator R * A * P.
template <typename Scalar>
SparseMatrix<Scalar> triple_product(const SparseMatrix<Scalar>& R, const SparseMatrix<Scalar>& A,
                                    const SparseMatrix<Scalar>& P) {
    detail::require_dims(R.cols() == A.rows() && A.cols() == P.rows(), "triple_product");
    SparseMatrix<Scalar> AP = A * P;
    SparseMatrix<Scalar> C = R * AP;
    canonicalize(C);
    return C;
}

/// Dense copy of A(rows, cols); absent entries are zero. Index sets must be
/// in range and duplicate-free but need not be sorted.
template <typename Scalar>
DenseMatrix<Scalar> extract_submatrix(const SparseMatrix<Scalar>& A, std::span<const int> rows,
                                      std::span<const int> cols) {
    std::vector<std::pair<int, int>> order(cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j) {
        if (cols[j] < 0 || cols[j] >= A.cols()) throw std::out_of_range("extract_submatrix: column index");
        order[j] = {cols[j], static_cast<int>(j)};
    }
    std::sort(order.begin(), order.end());
    for (std::size_t j = 1; j < order.size(); ++j)
        if (order[j].first == order[j - 1].first)
            throw std::invalid_argument("extract_submatrix: duplicate column index");

    DenseMatrix<Scalar> out = DenseMatrix<Scalar>::Zero(static_cast<Eigen::Index>(rows.size()),
                                                         static_cast<Eigen::Index>(cols.size()));
    const int* outer = A.outerIndexPtr();
    const int* inner = A.innerIndexPtr();
    const Scalar* val = A.valuePtr();
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const int i = rows[r];
        if (i < 0 || i >= A.rows()) throw std::out_of_range("extract_submatrix: row index");
        int k = outer[i];
        const int end = outer[i + 1];
        std::size_t j = 0;
        while (k < end && j < order.size()) {
            if (inner[k] < order[j].first) {
                ++k;
            } else if (inner[k] > order[j].first) {
                ++j;
            } else {
                out(static_cast<Eigen::Index>(r), order[j].second) = val[k];
                ++k;
                ++j;
            }
        }
    }
    return out;
}

template <typename Scalar>
Vector<Scalar> diagonal(const SparseMatrix<Scalar>& A) {
    return A.diagonal();
}

/// Drops off-diagonal a_ij with |a_ij| < drop_tol * max_{k!=i} |a_ik|.
/// Dropped mass is discarded, not lumped.
template <typename Scalar>
SparseMatrix<Scalar> filter_small(const SparseMatrix<Scalar>& A, Scalar drop_tol) {
    if (drop_tol < Scalar(0)) throw std::invalid_argument("filter_small: negative drop tolerance");
    std::vector<Triplet<Scalar>> kept;
    kept.reserve(static_cast<std::size_t>(A.nonZeros()));
    for (int i = 0; i < A.outerSize(); ++i) {
        Scalar row_max(0);
        for (typename SparseMatrix<Scalar>::InnerIterator it(A, i); it; ++it)
            if (it.col() != i) row_max = std::max(row_max, std::abs(it.value()));
        const Scalar cut = drop_tol * row_max;
        for (typename SparseMatrix<Scalar>::InnerIterator it(A, i); it; ++it)
            if (it.col() == i || !(std::abs(it.value()) < cut)) kept.emplace_back(i, it.col(), it.value());
    }
    return from_triplets<Scalar>(static_cast<int>(A.rows()), static_cast<int>(A.cols()), kept);
}

template <typename Scalar>
DenseMatrix<Scalar> to_dense(const SparseMatrix<Scalar>& A) {
    return DenseMatrix<Scalar>(A);
}

template <typename Scalar>
SparseMatrix<Scalar> from_dense(const DenseMatrix<Scalar>& M) {
    std::vector<Triplet<Scalar>> trip;
    for (Eigen::Index i = 0; i < M.rows(); ++i)
        for (Eigen::Index j = 0; j < M.cols(); ++j)
            if (M(i, j) != Scalar(0)) trip.emplace_back(static_cast<int>(i), static_cast<int>(j), M(i, j));
    return from_triplets<Scalar>(static_cast<int>(M.rows()), static_cast<int>(M.cols()), trip);
}

/// Binary (all-ones) matrix with the same pattern as A.
template <typename Scalar>
SparseMatrix<Scalar> pattern_of(const SparseMatrix<Scalar>& A) {
    SparseMatrix<Scalar> B = A;
    B.makeCompressed();
    std::fill(B.valuePtr(), B.valuePtr() + B.nonZeros(), Scalar(1));
    return B;
}

} // namespace clair

#endif
