#ifndef CLAIR_TRANSFER_HPP
#define CLAIR_TRANSFER_HPP

#include "clair/kernels.hpp"
#include "clair/partition.hpp"
#include "clair/relaxation.hpp"
#include "clair/sparse.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace clair {

enum class CoarsenType { FC, Agg };
enum class InverseType { ExactLU, Diagonal };
enum class RestrictionSource { TransposeOfA, PTranspose };

/// Knobs of the constrained local-solve construction of P = [W; I].
template <typename Scalar>
struct TransferConfig {
    CoarsenType coarsen_type = CoarsenType::Agg;
    int sparsity_degree = 2;
    Scalar interp_strength_theta = Scalar(0.5);
    /// n x k near-nullspace modes on the current level; used when
    /// use_constraints is set.
    DenseMatrix<Scalar> constraint_vectors;
    bool use_constraints = true;
    int constraint_smoothing_steps = 5;
    InverseType inverse_type = InverseType::ExactLU;
    int outer_iterations = 1;
    RestrictionSource build_R_from = RestrictionSource::PTranspose;

    void validate() const {
        if (sparsity_degree < 1) throw std::invalid_argument("TransferConfig: sparsity degree must be >= 1");
        if (outer_iterations < 1) throw std::invalid_argument("TransferConfig: outer iterations must be >= 1");
        if (constraint_smoothing_steps < 0) throw std::invalid_argument("TransferConfig: negative smoothing steps");
        if (use_constraints)
            for (Eigen::Index j = 0; j < constraint_vectors.cols(); ++j)
                if (constraint_vectors.col(j).cwiseAbs().maxCoeff() == Scalar(0))
                    throw std::invalid_argument("TransferConfig: zero constraint vector");
    }
};

/// Counters for local fallbacks taken during construction.
struct TransferDiagnostics {
    int singular_blocks = 0;
    int skipped_constraint_rows = 0;

    TransferDiagnostics& operator+=(const TransferDiagnostics& o) {
        singular_blocks += o.singular_blocks;
        skipped_constraint_rows += o.skipped_constraint_rows;
        return *this;
    }
};

/// P (n x n_c) or R (n_c x n) together with the splitting it was built on.
template <typename Scalar>
struct TransferOperator {
    SparseMatrix<Scalar> matrix;
    CfSplitting splitting;
    TransferDiagnostics diagnostics;
};

/// Allowed F-row indices (ascending) for every coarse column of W, or every
/// coarse row of Z.
struct SparsityPattern {
    int n_fine = 0;
    std::vector<std::vector<int>> columns;

    int n_coarse() const { return static_cast<int>(columns.size()); }
    std::size_t nnz() const {
        std::size_t s = 0;
        for (const auto& c : columns) s += c.size();
        return s;
    }
};

/// [S_fc; I] as an n x n_c binary matrix.
template <typename Scalar>
SparseMatrix<Scalar> fc_base_pattern(const SparseMatrix<Scalar>& S, const CfSplitting& splitting) {
    std::vector<Triplet<Scalar>> trip;
    for (int i = 0; i < S.outerSize(); ++i) {
        if (splitting.is_c(i)) {
            trip.emplace_back(i, splitting.fine_to_coarse[static_cast<std::size_t>(i)], Scalar(1));
            continue;
        }
        for (typename SparseMatrix<Scalar>::InnerIterator it(S, i); it; ++it)
            if (splitting.is_c(static_cast<int>(it.col())))
                trip.emplace_back(i, splitting.fine_to_coarse[static_cast<std::size_t>(it.col())], Scalar(1));
    }
    return from_triplets<Scalar>(static_cast<int>(S.rows()), splitting.c_count, trip);
}

/// Aggregation operator rebuilt from the aggregate map of the splitting.
template <typename Scalar>
SparseMatrix<Scalar> aggregation_base_pattern(const CfSplitting& splitting) {
    if (!splitting.aggregate_of) throw std::invalid_argument("aggregation_base_pattern: splitting carries no aggregates");
    std::vector<Triplet<Scalar>> trip;
    for (int i = 0; i < splitting.size(); ++i) trip.emplace_back(i, (*splitting.aggregate_of)[static_cast<std::size_t>(i)], Scalar(1));
    return from_triplets<Scalar>(splitting.size(), splitting.c_count, trip);
}

/// F-row structure of (S + I)^{m-1} T_base, returned column by column.
template <typename Scalar>
SparsityPattern build_sparsity_pattern(const SparseMatrix<Scalar>& S, const SparseMatrix<Scalar>& base,
                                       const CfSplitting& splitting, int degree) {
    if (degree < 1) throw std::invalid_argument("build_sparsity_pattern: degree must be >= 1");
    if (base.rows() != S.rows() || base.cols() != splitting.c_count)
        throw DimensionError("build_sparsity_pattern: base pattern shape");
    SparseMatrix<Scalar> grow = pattern_of(S);
    grow += identity<Scalar>(static_cast<int>(S.rows()));
    grow = pattern_of(grow);
    SparseMatrix<Scalar> M = pattern_of(base);
    for (int k = 1; k < degree; ++k) M = pattern_of(SparseMatrix<Scalar>(grow * M));

    SparsityPattern out;
    out.n_fine = static_cast<int>(S.rows());
    out.columns.resize(static_cast<std::size_t>(splitting.c_count));
    for (int i = 0; i < M.outerSize(); ++i) {
        if (splitting.is_c(i)) continue;
        for (typename SparseMatrix<Scalar>::InnerIterator it(M, i); it; ++it) out.columns[static_cast<std::size_t>(it.col())].push_back(i);
    }
    return out;
}

/// Pattern for l-AIR restriction rows: F-points within `degree` strong hops
/// of each C-point, following the dependencies of A (strength of A^T's base).
template <typename Scalar>
SparsityPattern lair_restriction_pattern(const SparseMatrix<Scalar>& A, const CfSplitting& splitting, Scalar theta,
                                         int degree) {
    const SparseMatrix<Scalar> St = transpose(classical_strength(A, theta).graph);
    return build_sparsity_pattern(St, fc_base_pattern(St, splitting), splitting, degree);
}

/// Full F pattern for every coarse column (ideal operators).
inline SparsityPattern full_f_pattern(const CfSplitting& splitting) {
    SparsityPattern p;
    p.n_fine = splitting.size();
    p.columns.assign(static_cast<std::size_t>(splitting.c_count), splitting.f_points);
    return p;
}

/// Classical Ruge-Stuben interpolation with strong-F redistribution and
/// weak-connection lumping into the diagonal.
template <typename Scalar>
TransferOperator<Scalar> classical_interpolation(const SparseMatrix<Scalar>& A, const StrengthMatrix<Scalar>& strength,
                                                 const CfSplitting& splitting) {
    const SparseMatrix<Scalar>& S = strength.graph;
    const int n = static_cast<int>(A.rows());
    std::vector<Triplet<Scalar>> trip;
    std::vector<char> strong(static_cast<std::size_t>(n), 0);
    std::vector<Scalar> num(static_cast<std::size_t>(n), Scalar(0));

    for (int i = 0; i < n; ++i) {
        if (splitting.is_c(i)) {
            trip.emplace_back(i, splitting.fine_to_coarse[static_cast<std::size_t>(i)], Scalar(1));
            continue;
        }
        std::vector<int> cs;
        std::vector<int> fs;
        for (typename SparseMatrix<Scalar>::InnerIterator it(S, i); it; ++it) {
            const int j = static_cast<int>(it.col());
            strong[static_cast<std::size_t>(j)] = 1;
            (splitting.is_c(j) ? cs : fs).push_back(j);
        }
        if (cs.empty())
            throw std::runtime_error("classical_interpolation: F-point " + std::to_string(i) +
                                     " has no strong C-neighbor; enable second-pass coarsening");
        for (int c : cs) strong[static_cast<std::size_t>(c)] = 2;

        Scalar denom(0);
        for (typename SparseMatrix<Scalar>::InnerIterator it(A, i); it; ++it) {
            const int j = static_cast<int>(it.col());
            if (j == i || !strong[static_cast<std::size_t>(j)]) denom += it.value();
            else if (strong[static_cast<std::size_t>(j)] == 2) num[static_cast<std::size_t>(j)] += it.value();
        }
        for (int k : fs) {
            const Scalar a_ik = A.coeff(i, k);
            if (a_ik == Scalar(0)) continue;
            Scalar sum(0);
            for (typename SparseMatrix<Scalar>::InnerIterator it(A, k); it; ++it)
                if (strong[static_cast<std::size_t>(it.col())] == 2) sum += it.value();
            if (sum == Scalar(0)) {
                denom += a_ik;
                continue;
            }
            for (typename SparseMatrix<Scalar>::InnerIterator it(A, k); it; ++it)
                if (strong[static_cast<std::size_t>(it.col())] == 2) num[static_cast<std::size_t>(it.col())] += a_ik * it.value() / sum;
        }
        if (denom == Scalar(0)) throw std::runtime_error("classical_interpolation: zero lumped diagonal at row " + std::to_string(i));
        for (int c : cs) {
            trip.emplace_back(i, splitting.fine_to_coarse[static_cast<std::size_t>(c)], -num[static_cast<std::size_t>(c)] / denom);
            num[static_cast<std::size_t>(c)] = Scalar(0);
        }
        for (typename SparseMatrix<Scalar>::InnerIterator it(S, i); it; ++it) strong[static_cast<std::size_t>(it.col())] = 0;
    }
    return {from_triplets<Scalar>(n, splitting.c_count, trip), splitting, {}};
}

/// l-AIR restriction R = [Z I]: for each C-point i solve the transposed
/// local system z A(Z_i, Z_i) = -A(i, Z_i) exactly.
template <typename Scalar>
TransferOperator<Scalar> lair_restriction(const SparseMatrix<Scalar>& A, const CfSplitting& splitting,
                                          const SparsityPattern& pattern) {
    if (pattern.n_coarse() != splitting.c_count) throw DimensionError("lair_restriction: pattern/splitting mismatch");
    TransferDiagnostics diag;
    std::vector<Triplet<Scalar>> trip;
    for (int ci = 0; ci < splitting.c_count; ++ci) {
        const int fine = splitting.c_points[static_cast<std::size_t>(ci)];
        trip.emplace_back(ci, fine, Scalar(1));
        const auto& rows = pattern.columns[static_cast<std::size_t>(ci)];
        if (rows.empty()) continue;
        for (int r : rows)
            if (!splitting.is_f(r)) throw std::invalid_argument("lair_restriction: pattern contains a C-point");
        const DenseMatrix<Scalar> local = extract_submatrix(A, rows, rows).transpose();
        const int fine_row[1] = {fine};
        const Vector<Scalar> rhs = -extract_submatrix(A, std::span<const int>(fine_row), rows).transpose();
        Vector<Scalar> z;
        try {
            z = LuFactor<Scalar>(local).solve(rhs);
        } catch (const SingularMatrixError&) {
            ++diag.singular_blocks;
            z = min_norm_ls(local, rhs);
        }
        for (std::size_t k = 0; k < rows.size(); ++k) trip.emplace_back(ci, rows[k], z[static_cast<Eigen::Index>(k)]);
    }
    return {from_triplets<Scalar>(splitting.c_count, static_cast<int>(A.rows()), trip), splitting, diag};
}

/// Presmooths constraint vectors with `steps` CFF-Jacobi sweeps on A b = 0,
/// then rescales each column to unit max-norm. A column annihilated by the
/// sweeps (possible on triangular operators) is replaced by its normalized
/// input.
template <typename Scalar>
DenseMatrix<Scalar> smooth_constraints(const SparseMatrix<Scalar>& A, const DenseMatrix<Scalar>& B0, int steps,
                                       const CfSplitting& splitting, Scalar weight) {
    if (steps < 0) throw std::invalid_argument("smooth_constraints: negative step count");
    if (B0.rows() != A.rows()) throw DimensionError("smooth_constraints: constraint rows");
    DenseMatrix<Scalar> B = B0;
    const Vector<Scalar> zero = Vector<Scalar>::Zero(A.rows());
    for (Eigen::Index j = 0; j < B.cols(); ++j) {
        Vector<Scalar> b = B.col(j);
        for (int s = 0; s < steps; ++s) cff_sweep(A, b, zero, splitting, weight);
        Scalar m = b.cwiseAbs().maxCoeff();
        if (!(m > Scalar(0))) {
            b = B0.col(j);
            m = b.cwiseAbs().maxCoeff();
        }
        if (m > Scalar(0)) b /= m;
        B.col(j) = b;
    }
    return B;
}

namespace detail {

/// W stored row-wise over F-rows with a column-wise index into the values.
template <typename Scalar>
struct LocalWeights {
    std::vector<int> row_ptr;
    std::vector<int> row_cols;
    std::vector<Scalar> values;
    std::vector<std::vector<int>> col_slots; // value index per pattern row, by column

    LocalWeights(const SparsityPattern& pattern) {
        const int n = pattern.n_fine;
        row_ptr.assign(static_cast<std::size_t>(n) + 1, 0);
        for (const auto& col : pattern.columns)
            for (int r : col) ++row_ptr[static_cast<std::size_t>(r) + 1];
        for (int i = 0; i < n; ++i) row_ptr[static_cast<std::size_t>(i) + 1] += row_ptr[static_cast<std::size_t>(i)];
        row_cols.resize(static_cast<std::size_t>(row_ptr.back()));
        values.assign(row_cols.size(), Scalar(0));
        std::vector<int> fill(row_ptr.begin(), row_ptr.end() - 1);
        col_slots.resize(pattern.columns.size());
        for (std::size_t c = 0; c < pattern.columns.size(); ++c) {
            col_slots[c].reserve(pattern.columns[c].size());
            for (int r : pattern.columns[c]) {
                const int slot = fill[static_cast<std::size_t>(r)]++;
                row_cols[static_cast<std::size_t>(slot)] = static_cast<int>(c);
                col_slots[c].push_back(slot);
            }
        }
    }
};

/// Row-local view of the constraint W B_c = B|_F: the local block of B_c
/// and its pseudoinverse for one F-row.
template <typename Scalar>
struct RowConstraint {
    DenseMatrix<Scalar> block; // len x k
    DenseMatrix<Scalar> block_pinv; // k x len
    bool active = false;
};

} // namespace detail

/// Constrained local approximate ideal interpolation P = [W; I].
///
/// The tentative W takes -A_fc on the pattern (S+I)^{m-1} T, where T is
/// [S_fc, I] or the aggregation operator. Each F-row is then fitted to the
/// mode constraint W B_c = B|_F by a minimum-norm update. Every outer
/// iteration applies the block-local inverses to the residual of
/// A_ff^{(i)} w^{(i)} = -a_fc^{(i)}, removes the component of the update that
/// would change W B_c, and adds it. Constraints are realized per F-row; the
/// global constraint matrix is never formed. This overload takes the
/// pattern as given; coarsen_type and sparsity_degree are ignored.
template <typename Scalar>
TransferOperator<Scalar> clair_transfer(const SparseMatrix<Scalar>& A, const SparsityPattern& pattern,
                                        const CfSplitting& splitting, const TransferConfig<Scalar>& cfg) {
    cfg.validate();
    if (A.rows() != A.cols() || A.rows() != splitting.size()) throw DimensionError("clair_transfer: operator/splitting");
    if (pattern.n_coarse() != splitting.c_count || pattern.n_fine != splitting.size())
        throw DimensionError("clair_transfer: pattern/splitting mismatch");
    for (const auto& rows : pattern.columns)
        for (int r : rows)
            if (!splitting.is_f(r)) throw std::invalid_argument("clair_transfer: pattern contains a C-point");
    const int n = static_cast<int>(A.rows());
    const int nc = splitting.c_count;
    detail::LocalWeights<Scalar> W(pattern);
    TransferDiagnostics diag;

    for (int c = 0; c < nc; ++c) {
        const int fine_c = splitting.c_points[static_cast<std::size_t>(c)];
        const auto& rows = pattern.columns[static_cast<std::size_t>(c)];
        const auto& slots = W.col_slots[static_cast<std::size_t>(c)];
        for (std::size_t k = 0; k < rows.size(); ++k) W.values[static_cast<std::size_t>(slots[k])] = -A.coeff(rows[k], fine_c);
    }

    const bool constrained = cfg.use_constraints && cfg.constraint_vectors.cols() > 0;
    std::vector<detail::RowConstraint<Scalar>> rc;
    if (constrained) {
        const DenseMatrix<Scalar>& B = cfg.constraint_vectors;
        if (B.rows() != n) throw DimensionError("clair_transfer: constraint vectors rows");
        const Eigen::Index k = B.cols();
        rc.resize(static_cast<std::size_t>(n));
        for (int r : splitting.f_points) {
            const int begin = W.row_ptr[static_cast<std::size_t>(r)];
            const int len = W.row_ptr[static_cast<std::size_t>(r) + 1] - begin;
            auto& row = rc[static_cast<std::size_t>(r)];
            row.block.resize(len, k);
            for (int t = 0; t < len; ++t) {
                const int c = W.row_cols[static_cast<std::size_t>(begin + t)];
                row.block.row(t) = B.row(splitting.c_points[static_cast<std::size_t>(c)]);
            }
            if (len == 0 || row.block.cwiseAbs().maxCoeff() == Scalar(0)) {
                ++diag.skipped_constraint_rows;
                continue;
            }
            row.active = true;
            row.block_pinv = pinv(row.block);
            Eigen::Map<Vector<Scalar>> u(W.values.data() + begin, len);
            const Vector<Scalar> misfit = B.row(r).transpose() - row.block.transpose() * u;
            u += row.block_pinv.transpose() * misfit;
        }
    }

    std::vector<Scalar> delta(W.values.size());
    for (int iter = 0; iter < cfg.outer_iterations; ++iter) {
        std::fill(delta.begin(), delta.end(), Scalar(0));
        for (int c = 0; c < nc; ++c) {
            const auto& rows = pattern.columns[static_cast<std::size_t>(c)];
            if (rows.empty()) continue;
            const auto& slots = W.col_slots[static_cast<std::size_t>(c)];
            const int fine_c[1] = {splitting.c_points[static_cast<std::size_t>(c)]};
            const DenseMatrix<Scalar> Aff = extract_submatrix(A, rows, rows);
            const Vector<Scalar> afc = extract_submatrix(A, rows, std::span<const int>(fine_c));
            Vector<Scalar> w(static_cast<Eigen::Index>(rows.size()));
            for (std::size_t t = 0; t < rows.size(); ++t) w[static_cast<Eigen::Index>(t)] = W.values[static_cast<std::size_t>(slots[t])];
            const Vector<Scalar> residual = -afc - Aff * w;
            Vector<Scalar> dw;
            if (cfg.inverse_type == InverseType::ExactLU) {
                try {
                    dw = LuFactor<Scalar>(Aff).solve(residual);
                } catch (const SingularMatrixError&) {
                    if (iter == 0) ++diag.singular_blocks;
                    dw = min_norm_ls(Aff, residual);
                }
            } else {
                const Vector<Scalar> d = Aff.diagonal();
                dw.resize(d.size());
                for (Eigen::Index t = 0; t < d.size(); ++t) dw[t] = d[t] != Scalar(0) ? residual[t] / d[t] : Scalar(0);
                if (iter == 0 && (d.array() == Scalar(0)).any()) ++diag.singular_blocks;
            }
            for (std::size_t t = 0; t < rows.size(); ++t) delta[static_cast<std::size_t>(slots[t])] = dw[static_cast<Eigen::Index>(t)];
        }
        if (constrained) {
            for (int r : splitting.f_points) {
                const auto& row = rc[static_cast<std::size_t>(r)];
                if (!row.active) continue;
                const int begin = W.row_ptr[static_cast<std::size_t>(r)];
                Eigen::Map<Vector<Scalar>> d(delta.data() + begin, row.block.rows());
                d -= row.block * (row.block_pinv * d);
            }
        }
        for (std::size_t s = 0; s < delta.size(); ++s) W.values[s] += delta[s];
        if (!constrained) continue;
        // remove roundoff drift from large projected updates
        for (int r : splitting.f_points) {
            const auto& row = rc[static_cast<std::size_t>(r)];
            if (!row.active) continue;
            const int begin = W.row_ptr[static_cast<std::size_t>(r)];
            Eigen::Map<Vector<Scalar>> u(W.values.data() + begin, row.block.rows());
            const Vector<Scalar> misfit = cfg.constraint_vectors.row(r).transpose() - row.block.transpose() * u;
            u += row.block_pinv.transpose() * misfit;
        }
    }

    std::vector<Triplet<Scalar>> trip;
    trip.reserve(W.values.size() + static_cast<std::size_t>(nc));
    for (int i = 0; i < n; ++i) {
        if (splitting.is_c(i)) {
            trip.emplace_back(i, splitting.fine_to_coarse[static_cast<std::size_t>(i)], Scalar(1));
            continue;
        }
        for (int s = W.row_ptr[static_cast<std::size_t>(i)]; s < W.row_ptr[static_cast<std::size_t>(i) + 1]; ++s)
            trip.emplace_back(i, W.row_cols[static_cast<std::size_t>(s)], W.values[static_cast<std::size_t>(s)]);
    }
    return {from_triplets<Scalar>(n, nc, trip), splitting, diag};
}

/// Builds the pattern from `strength` and the configured base, then runs the
/// construction above.
template <typename Scalar>
TransferOperator<Scalar> clair_transfer(const SparseMatrix<Scalar>& A, const StrengthMatrix<Scalar>& strength,
                                        const CfSplitting& splitting, const TransferConfig<Scalar>& cfg) {
    cfg.validate();
    if (A.rows() != A.cols() || A.rows() != splitting.size()) throw DimensionError("clair_transfer: operator/splitting");
    const SparseMatrix<Scalar> base = cfg.coarsen_type == CoarsenType::Agg ? aggregation_base_pattern<Scalar>(splitting)
                                                                             : fc_base_pattern(strength.graph, splitting);
    return clair_transfer(A, build_sparsity_pattern(strength.graph, base, splitting, cfg.sparsity_degree), splitting, cfg);
}

/// Injection of fine-level vectors to the C-points.
template <typename Scalar>
DenseMatrix<Scalar> inject(const DenseMatrix<Scalar>& B, const CfSplitting& splitting) {
    DenseMatrix<Scalar> Bc(splitting.c_count, B.cols());
    for (int c = 0; c < splitting.c_count; ++c) Bc.row(c) = B.row(splitting.c_points[static_cast<std::size_t>(c)]);
    return Bc;
}

/// max_i |(P B_c - B)_i| over all columns.
template <typename Scalar>
Scalar constraint_residual(const SparseMatrix<Scalar>& P, const DenseMatrix<Scalar>& B, const CfSplitting& splitting) {
    if (B.size() == 0) return Scalar(0);
    const DenseMatrix<Scalar> Bc = inject(B, splitting);
    const DenseMatrix<Scalar> fit = P * Bc;
    return (fit - B).cwiseAbs().maxCoeff();
}

} // namespace clair

#endif
