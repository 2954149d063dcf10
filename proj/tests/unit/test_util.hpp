#ifndef CLAIR_TEST_UTIL_HPP
#define CLAIR_TEST_UTIL_HPP

#include "clair/partition.hpp"
#include "clair/sparse.hpp"

#include <random>
#include <vector>

namespace testutil {

using namespace clair;

inline SparseMatrixd tridiag(int n, double lo = -1.0, double d = 2.0, double up = -1.0) {
    std::vector<Triplet<double>> t;
    for (int i = 0; i < n; ++i) {
        t.emplace_back(i, i, d);
        if (i > 0) t.emplace_back(i, i - 1, lo);
        if (i + 1 < n) t.emplace_back(i, i + 1, up);
    }
    return from_triplets<double>(n, n, t);
}

/// Random sparse matrix with density p and a dominant diagonal.
inline SparseMatrixd random_sparse(int n, double p, std::mt19937_64& rng, double diag_shift = 0.0) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::bernoulli_distribution keep(p);
    std::vector<Triplet<double>> t;
    for (int i = 0; i < n; ++i) {
        double rowsum = 0.0;
        for (int j = 0; j < n; ++j) {
            if (i == j || !keep(rng)) continue;
            const double v = u(rng);
            rowsum += std::abs(v);
            t.emplace_back(i, j, v);
        }
        t.emplace_back(i, i, rowsum + 1.0 + diag_shift);
    }
    return from_triplets<double>(n, n, t);
}

inline SparseMatrixd random_spd(int n, double p, std::mt19937_64& rng) {
    const SparseMatrixd M = random_sparse(n, p, rng);
    SparseMatrixd S = SparseMatrixd(M + transpose(M)) * 0.5;
    canonicalize(S);
    return S;
}

/// Lower triangular with dominant diagonal (a perfectly upwinded operator).
inline SparseMatrixd random_lower(int n, double p, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 0.0);
    std::bernoulli_distribution keep(p);
    std::vector<Triplet<double>> t;
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int j = 0; j < i; ++j)
            if (keep(rng)) {
                const double v = u(rng);
                s -= v;
                t.emplace_back(i, j, v);
            }
        t.emplace_back(i, i, s + 1.0);
    }
    return from_triplets<double>(n, n, t);
}

/// Random splitting with at least one C- and one F-point.
inline CfSplitting random_splitting(int n, std::mt19937_64& rng, double c_fraction = 0.35) {
    std::bernoulli_distribution coin(c_fraction);
    std::vector<PointType> labels(static_cast<std::size_t>(n));
    for (auto& l : labels) l = coin(rng) ? PointType::C : PointType::F;
    labels[0] = PointType::C;
    labels[static_cast<std::size_t>(n - 1)] = PointType::F;
    return CfSplitting::from_labels(labels);
}

/// Dense Schur complement A_cc - A_cf A_ff^{-1} A_fc.
inline DenseMatrixd schur_oracle(const SparseMatrixd& A, const CfSplitting& s) {
    const DenseMatrixd D = to_dense(A);
    auto block = [&](const std::vector<int>& r, const std::vector<int>& c) {
        DenseMatrixd out(r.size(), c.size());
        for (std::size_t i = 0; i < r.size(); ++i)
            for (std::size_t j = 0; j < c.size(); ++j) out(i, j) = D(r[i], c[j]);
        return out;
    };
    const DenseMatrixd Aff = block(s.f_points, s.f_points);
    return block(s.c_points, s.c_points) -
           block(s.c_points, s.f_points) * Aff.partialPivLu().solve(block(s.f_points, s.c_points));
}

inline double rel_fro(const DenseMatrixd& X, const DenseMatrixd& Y) { return (X - Y).norm() / Y.norm(); }

} // namespace testutil

#endif
