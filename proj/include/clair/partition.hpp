#ifndef CLAIR_PARTITION_HPP
#define CLAIR_PARTITION_HPP

#include "clair/sparse.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace clair {

enum class PointType : std::uint8_t { F = 0, C = 1 };

/// Thresholded coupling graph. Entries keep the value of A, pattern excludes
/// the diagonal.
template <typename Scalar>
struct StrengthMatrix {
    SparseMatrix<Scalar> graph;
    Scalar theta{};
};

/// C/F partition of the dofs, optionally with aggregate membership. C-points
/// are numbered on the coarse level in ascending fine index order.
struct CfSplitting {
    std::vector<PointType> labels;
    int c_count = 0;
    int f_count = 0;
    std::optional<std::vector<int>> aggregate_of;
    std::vector<int> fine_to_coarse; // -1 on F-points
    std::vector<int> c_points;
    std::vector<int> f_points;

    static CfSplitting from_labels(std::vector<PointType> labels) {
        CfSplitting s;
        s.labels = std::move(labels);
        const int n = static_cast<int>(s.labels.size());
        s.fine_to_coarse.assign(static_cast<std::size_t>(n), -1);
        for (int i = 0; i < n; ++i) {
            if (s.labels[static_cast<std::size_t>(i)] == PointType::C) {
                s.fine_to_coarse[static_cast<std::size_t>(i)] = s.c_count++;
                s.c_points.push_back(i);
            } else {
                s.f_points.push_back(i);
            }
        }
        s.f_count = n - s.c_count;
        return s;
    }

    int size() const { return static_cast<int>(labels.size()); }
    bool is_c(int i) const { return labels[static_cast<std::size_t>(i)] == PointType::C; }
    bool is_f(int i) const { return labels[static_cast<std::size_t>(i)] == PointType::F; }

    /// Throws std::logic_error when an invariant is broken.
    void validate() const {
        const int n = size();
        if (c_count + f_count != n) throw std::logic_error("CfSplitting: counts do not cover all dofs");
        if (static_cast<int>(c_points.size()) != c_count || static_cast<int>(f_points.size()) != f_count)
            throw std::logic_error("CfSplitting: point lists inconsistent with counts");
        int next = 0;
        for (int i = 0; i < n; ++i) {
            const int fc = fine_to_coarse[static_cast<std::size_t>(i)];
            if (is_c(i) ? fc != next++ : fc != -1) throw std::logic_error("CfSplitting: fine_to_coarse map broken");
        }
        if (aggregate_of) {
            if (static_cast<int>(aggregate_of->size()) != n) throw std::logic_error("CfSplitting: aggregate map size");
            std::vector<int> roots(static_cast<std::size_t>(c_count), 0);
            for (int i = 0; i < n; ++i) {
                const int a = (*aggregate_of)[static_cast<std::size_t>(i)];
                if (a < 0 || a >= c_count) throw std::logic_error("CfSplitting: dof outside every aggregate");
                if (is_c(i)) {
                    if (fine_to_coarse[static_cast<std::size_t>(i)] != a)
                        throw std::logic_error("CfSplitting: root not in its own aggregate");
                    ++roots[static_cast<std::size_t>(a)];
                }
            }
            for (int r : roots)
                if (r != 1) throw std::logic_error("CfSplitting: aggregate without exactly one root");
        }
    }
};

/// Binary n x n_agg matrix; column i is the indicator of aggregate i.
template <typename Scalar>
struct AggregationOperator {
    SparseMatrix<Scalar> matrix;
};

/// Ruge-Stuben strength: j strongly influences i when
/// -a_ij >= theta * max_{k != i}(-a_ik). Rows without a negative off-diagonal
/// fall back to the same test on |a_ij|.
template <typename Scalar>
StrengthMatrix<Scalar> classical_strength(const SparseMatrix<Scalar>& A, Scalar theta) {
    if (A.rows() != A.cols()) throw DimensionError("classical_strength: matrix is not square");
    if (theta < Scalar(0) || theta > Scalar(1)) throw std::invalid_argument("classical_strength: theta outside [0,1]");
    std::vector<Triplet<Scalar>> strong;
    for (int i = 0; i < A.outerSize(); ++i) {
        Scalar max_neg(0);
        Scalar max_abs(0);
        for (typename SparseMatrix<Scalar>::InnerIterator it(A, i); it; ++it) {
            if (it.col() == i) continue;
            max_neg = std::max(max_neg, -it.value());
            max_abs = std::max(max_abs, std::abs(it.value()));
        }
        const bool use_abs = !(max_neg > Scalar(0));
        const Scalar cut = theta * (use_abs ? max_abs : max_neg);
        if (use_abs && max_abs == Scalar(0)) continue;
        for (typename SparseMatrix<Scalar>::InnerIterator it(A, i); it; ++it) {
            if (it.col() == i || it.value() == Scalar(0)) continue;
            const Scalar m = use_abs ? std::abs(it.value()) : -it.value();
            if (m >= cut && m > Scalar(0)) strong.emplace_back(i, it.col(), it.value());
        }
    }
    return {from_triplets<Scalar>(static_cast<int>(A.rows()), static_cast<int>(A.cols()), strong), theta};
}

/// Smoothed-aggregation strength: |a_ij| >= theta * sqrt(|a_ii a_jj|).
template <typename Scalar>
StrengthMatrix<Scalar> symmetric_strength(const SparseMatrix<Scalar>& A, Scalar theta) {
    if (A.rows() != A.cols()) throw DimensionError("symmetric_strength: matrix is not square");
    if (theta < Scalar(0) || theta > Scalar(1)) throw std::invalid_argument("symmetric_strength: theta outside [0,1]");
    const Vector<Scalar> d = diagonal(A).cwiseAbs();
    for (Eigen::Index i = 0; i < d.size(); ++i)
        if (d[i] == Scalar(0)) throw std::invalid_argument("symmetric_strength: zero diagonal at row " + std::to_string(i));
    std::vector<Triplet<Scalar>> strong;
    for (int i = 0; i < A.outerSize(); ++i)
        for (typename SparseMatrix<Scalar>::InnerIterator it(A, i); it; ++it) {
            if (it.col() == i || it.value() == Scalar(0)) continue;
            if (std::abs(it.value()) >= theta * std::sqrt(d[i] * d[it.col()])) strong.emplace_back(i, it.col(), it.value());
        }
    return {from_triplets<Scalar>(static_cast<int>(A.rows()), static_cast<int>(A.cols()), strong), theta};
}

/// Union of the patterns of S and S^T, weighted by max(|s_ij|, |s_ji|).
template <typename Scalar>
SparseMatrix<Scalar> symmetrized_weights(const SparseMatrix<Scalar>& S) {
    std::vector<Triplet<Scalar>> trip;
    trip.reserve(static_cast<std::size_t>(2 * S.nonZeros()));
    for (int i = 0; i < S.outerSize(); ++i)
        for (typename SparseMatrix<Scalar>::InnerIterator it(S, i); it; ++it) {
            trip.emplace_back(i, it.col(), std::abs(it.value()));
            trip.emplace_back(it.col(), i, std::abs(it.value()));
        }
    SparseMatrix<Scalar> W(S.rows(), S.cols());
    W.setFromTriplets(trip.begin(), trip.end(), [](const Scalar& a, const Scalar& b) { return std::max(a, b); });
    W.makeCompressed();
    return W;
}

/// Classical Ruge-Stuben C/F splitting. The first pass selects C-points
/// greedily by influence count (ties: lowest index); dofs left undecided
/// become C. The optional second pass adds C-points so that strongly
/// connected F-pairs share a C-point.
template <typename Scalar>
CfSplitting rs_coarsen(const StrengthMatrix<Scalar>& strength, bool second_pass = false) {
    const SparseMatrix<Scalar>& S = strength.graph;
    const int n = static_cast<int>(S.rows());
    const SparseMatrix<Scalar> ST = transpose(S);
    const int* s_ptr = S.outerIndexPtr();
    const int* s_col = S.innerIndexPtr();
    const int* t_ptr = ST.outerIndexPtr();
    const int* t_col = ST.innerIndexPtr();

    enum : char { U = 0, Cp = 1, Fp = 2 };
    std::vector<char> state(static_cast<std::size_t>(n), U);
    std::vector<int> lambda(static_cast<std::size_t>(n));
    std::set<std::pair<int, int>> queue; // (-lambda, index)
    for (int i = 0; i < n; ++i) {
        lambda[static_cast<std::size_t>(i)] = t_ptr[i + 1] - t_ptr[i];
        queue.emplace(-lambda[static_cast<std::size_t>(i)], i);
    }
    auto bump = [&](int k, int delta) {
        queue.erase({-lambda[static_cast<std::size_t>(k)], k});
        lambda[static_cast<std::size_t>(k)] += delta;
        queue.emplace(-lambda[static_cast<std::size_t>(k)], k);
    };

    while (!queue.empty()) {
        const auto [neg, i] = *queue.begin();
        if (neg >= 0) break;
        queue.erase(queue.begin());
        state[static_cast<std::size_t>(i)] = Cp;
        for (int p = t_ptr[i]; p < t_ptr[i + 1]; ++p) {
            const int j = t_col[p];
            if (state[static_cast<std::size_t>(j)] != U) continue;
            state[static_cast<std::size_t>(j)] = Fp;
            queue.erase({-lambda[static_cast<std::size_t>(j)], j});
            for (int q = s_ptr[j]; q < s_ptr[j + 1]; ++q) {
                const int k = s_col[q];
                if (state[static_cast<std::size_t>(k)] == U) bump(k, +1);
            }
        }
        for (int p = s_ptr[i]; p < s_ptr[i + 1]; ++p) {
            const int j = s_col[p];
            if (state[static_cast<std::size_t>(j)] == U) bump(j, -1);
        }
    }
    for (auto& s : state)
        if (s == U) s = Cp;

    if (second_pass) {
        std::vector<int> mark(static_cast<std::size_t>(n), -1);
        for (int i = 0; i < n; ++i) {
            if (state[static_cast<std::size_t>(i)] != Fp) continue;
            for (int p = s_ptr[i]; p < s_ptr[i + 1]; ++p)
                if (state[static_cast<std::size_t>(s_col[p])] == Cp) mark[static_cast<std::size_t>(s_col[p])] = i;
            int tentative = -1;
            for (int p = s_ptr[i]; p < s_ptr[i + 1]; ++p) {
                const int j = s_col[p];
                if (state[static_cast<std::size_t>(j)] != Fp) continue;
                bool shared = false;
                for (int q = s_ptr[j]; q < s_ptr[j + 1] && !shared; ++q)
                    shared = mark[static_cast<std::size_t>(s_col[q])] == i;
                if (shared) continue;
                if (tentative >= 0) {
                    state[static_cast<std::size_t>(tentative)] = Fp;
                    state[static_cast<std::size_t>(i)] = Cp;
                    break;
                }
                tentative = j;
                state[static_cast<std::size_t>(j)] = Cp;
                mark[static_cast<std::size_t>(j)] = i;
            }
        }
    }

    std::vector<PointType> labels(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) labels[static_cast<std::size_t>(i)] = state[static_cast<std::size_t>(i)] == Cp ? PointType::C : PointType::F;
    return CfSplitting::from_labels(std::move(labels));
}

/// Greedy root-node aggregation on the symmetrized strength graph.
///
/// Phase 1 scans dofs in index order and seeds an aggregate from every dof
/// whose closed neighborhood is entirely unassigned; the seed is the root
/// (C-point). Phase 2 attaches each remaining dof to the phase-1 aggregate of
/// its strongest neighbor (ties: lowest aggregate). Anything still unassigned
/// seeds a new aggregate with its unassigned neighbors. Aggregates are
/// numbered by ascending root index.
template <typename Scalar>
std::pair<AggregationOperator<Scalar>, CfSplitting> greedy_aggregate(const StrengthMatrix<Scalar>& strength) {
    const SparseMatrix<Scalar> G = symmetrized_weights(strength.graph);
    const int n = static_cast<int>(G.rows());
    const int* ptr = G.outerIndexPtr();
    const int* col = G.innerIndexPtr();
    const Scalar* w = G.valuePtr();

    std::vector<int> agg(static_cast<std::size_t>(n), -1);
    std::vector<int> roots;

    for (int i = 0; i < n; ++i) {
        if (agg[static_cast<std::size_t>(i)] >= 0) continue;
        bool free = true;
        for (int p = ptr[i]; p < ptr[i + 1] && free; ++p) free = agg[static_cast<std::size_t>(col[p])] < 0;
        if (!free) continue;
        const int a = static_cast<int>(roots.size());
        roots.push_back(i);
        agg[static_cast<std::size_t>(i)] = a;
        for (int p = ptr[i]; p < ptr[i + 1]; ++p) agg[static_cast<std::size_t>(col[p])] = a;
    }

    const std::vector<int> phase1 = agg;
    for (int i = 0; i < n; ++i) {
        if (phase1[static_cast<std::size_t>(i)] >= 0) continue;
        int best = -1;
        Scalar best_w(-1);
        for (int p = ptr[i]; p < ptr[i + 1]; ++p) {
            const int a = phase1[static_cast<std::size_t>(col[p])];
            if (a < 0) continue;
            if (w[p] > best_w || (w[p] == best_w && a < best)) {
                best_w = w[p];
                best = a;
            }
        }
        if (best >= 0) agg[static_cast<std::size_t>(i)] = best;
    }

    for (int i = 0; i < n; ++i) {
        if (agg[static_cast<std::size_t>(i)] >= 0) continue;
        const int a = static_cast<int>(roots.size());
        roots.push_back(i);
        agg[static_cast<std::size_t>(i)] = a;
        for (int p = ptr[i]; p < ptr[i + 1]; ++p)
            if (agg[static_cast<std::size_t>(col[p])] < 0) agg[static_cast<std::size_t>(col[p])] = a;
    }

    std::vector<PointType> labels(static_cast<std::size_t>(n), PointType::F);
    for (int r : roots) labels[static_cast<std::size_t>(r)] = PointType::C;
    CfSplitting split = CfSplitting::from_labels(std::move(labels));
    for (auto& a : agg) a = split.fine_to_coarse[static_cast<std::size_t>(roots[static_cast<std::size_t>(a)])];
    split.aggregate_of = agg;

    std::vector<Triplet<Scalar>> trip;
    trip.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) trip.emplace_back(i, agg[static_cast<std::size_t>(i)], Scalar(1));
    AggregationOperator<Scalar> op{from_triplets<Scalar>(n, split.c_count, trip)};
    return {std::move(op), std::move(split)};
}

} // namespace clair

#endif
