#ifndef CLAIR_HIERARCHY_HPP
#define CLAIR_HIERARCHY_HPP

#include "clair/kernels.hpp"
#include "clair/partition.hpp"
#include "clair/relaxation.hpp"
#include "clair/sparse.hpp"
#include "clair/transfer.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace clair {

enum class Method { lAIR, CLAIR, ClassicalRS };
enum class StrengthKind { Classical, Symmetric };

template <typename Scalar>
struct SolverConfig {
    Method method = Method::CLAIR;
    Scalar strength_theta = Scalar(0.5);
    /// Strength used for the Agg path; FC always uses the classical measure.
    StrengthKind agg_strength = StrengthKind::Classical;
    /// l-AIR restriction pattern strength and degree.
    Scalar restriction_theta = Scalar(0.05);
    int restriction_degree = 2;
    bool second_pass = false;
    bool filter_coarse = false;
    Scalar drop_tol = Scalar(1e-4);
    int max_levels = 30;
    int max_coarse = 20;
    int spectral_iters = 15;
    TransferConfig<Scalar> transfer;
    RelaxConfig<Scalar> relax;
    /// Block size for fine-level prescaling; 0 disables it.
    int prescale_block = 0;

    void validate() const {
        if (strength_theta < Scalar(0) || strength_theta > Scalar(1))
            throw std::invalid_argument("SolverConfig: strength theta outside [0, 1]");
        if (max_levels < 1) throw std::invalid_argument("SolverConfig: max_levels must be >= 1");
        if (max_coarse < 1) throw std::invalid_argument("SolverConfig: max_coarse must be >= 1");
        if (restriction_degree < 1) throw std::invalid_argument("SolverConfig: restriction degree must be >= 1");
        if (drop_tol < Scalar(0)) throw std::invalid_argument("SolverConfig: negative drop tolerance");
        if (method == Method::CLAIR) transfer.validate();
        if (method != Method::CLAIR && transfer.coarsen_type == CoarsenType::Agg)
            throw std::invalid_argument("SolverConfig: aggregation coarsening requires the CLAIR method");
    }

    static SolverConfig lair_symmetric(int r_degree = 2) {
        SolverConfig c;
        c.method = Method::lAIR;
        c.strength_theta = Scalar(0.25);
        c.restriction_theta = Scalar(0.05);
        c.restriction_degree = r_degree;
        c.filter_coarse = true;
        c.transfer.coarsen_type = CoarsenType::FC;
        return c;
    }

    static SolverConfig lair_nonsymmetric() {
        SolverConfig c = lair_symmetric(2);
        c.second_pass = true;
        c.relax.weighted_postsmoothing = false;
        c.prescale_block = 1;
        return c;
    }

    static SolverConfig clair_symmetric() {
        SolverConfig c;
        c.method = Method::CLAIR;
        c.strength_theta = Scalar(0.5);
        c.transfer.coarsen_type = CoarsenType::Agg;
        c.transfer.sparsity_degree = 2;
        c.transfer.interp_strength_theta = Scalar(0.5);
        c.transfer.constraint_smoothing_steps = 5;
        c.transfer.build_R_from = RestrictionSource::PTranspose;
        return c;
    }

    static SolverConfig clair_nonsymmetric(CoarsenType coarsen) {
        SolverConfig c = clair_symmetric();
        c.strength_theta = Scalar(0.25);
        c.transfer.coarsen_type = coarsen;
        c.transfer.interp_strength_theta = Scalar(0.05);
        c.transfer.build_R_from = RestrictionSource::TransposeOfA;
        c.relax.weighted_postsmoothing = false;
        c.prescale_block = 1;
        return c;
    }

    static SolverConfig classical_rs() {
        SolverConfig c;
        c.method = Method::ClassicalRS;
        c.strength_theta = Scalar(0.25);
        c.transfer.coarsen_type = CoarsenType::FC;
        return c;
    }
};

template <typename Scalar>
struct Level {
    SparseMatrix<Scalar> A;
    TransferOperator<Scalar> P;
    TransferOperator<Scalar> R;
    CfSplitting splitting;
    Scalar relax_weight = Scalar(1);
    /// Smoothed constraint vectors used for P and, when built from A^T, for R.
    DenseMatrix<Scalar> constraints;
    DenseMatrix<Scalar> constraints_transpose;
};

template <typename Scalar>
struct Hierarchy {
    std::vector<Level<Scalar>> levels; // all but the coarsest carry transfers
    SparseMatrix<Scalar> coarse_A;
    LuFactor<Scalar> coarse_solver;
    SolverConfig<Scalar> config;

    int num_levels() const { return static_cast<int>(levels.size()) + 1; }

    const SparseMatrix<Scalar>& op(int k) const {
        return k < static_cast<int>(levels.size()) ? levels[static_cast<std::size_t>(k)].A : coarse_A;
    }
};

namespace detail {

template <typename Scalar>
Scalar jacobi_weight(const SparseMatrix<Scalar>& A, int iters) {
    const Scalar rho = estimate_jacobi_spectral_radius(A, iters);
    if (!(rho > Scalar(0))) throw std::runtime_error("setup: nonpositive spectral radius estimate");
    return Scalar(1) / rho;
}

template <typename Scalar>
CfSplitting coarsen(const SparseMatrix<Scalar>& A, const SolverConfig<Scalar>& cfg) {
    const bool agg = cfg.method == Method::CLAIR && cfg.transfer.coarsen_type == CoarsenType::Agg;
    if (!agg) return rs_coarsen(classical_strength(A, cfg.strength_theta), cfg.second_pass);
    StrengthMatrix<Scalar> S = cfg.agg_strength == StrengthKind::Symmetric ? symmetric_strength(A, cfg.strength_theta)
                                                                           : classical_strength(A, cfg.strength_theta);
    S.graph = symmetrized_weights(S.graph);
    return greedy_aggregate(S).second;
}

template <typename Scalar>
TransferOperator<Scalar> clair_side(const SparseMatrix<Scalar>& A, const CfSplitting& splitting,
                                    const DenseMatrix<Scalar>& B, const SolverConfig<Scalar>& cfg) {
    TransferConfig<Scalar> t = cfg.transfer;
    t.constraint_vectors = B;
    return clair_transfer(A, classical_strength(A, t.interp_strength_theta), splitting, t);
}

} // namespace detail

/// Recursive setup: strength, coarsening, R and P per method, A_c = R A P,
/// optional filtering; stops at max_coarse, max_levels or stagnation.
template <typename Scalar>
Hierarchy<Scalar> setup(const SparseMatrix<Scalar>& A0, const SolverConfig<Scalar>& cfg) {
    cfg.validate();
    if (A0.rows() != A0.cols()) throw DimensionError("setup: matrix is not square");
    if ((diagonal(A0).array() == Scalar(0)).any()) throw std::invalid_argument("setup: zero diagonal entry");

    Hierarchy<Scalar> H;
    H.config = cfg;
    SparseMatrix<Scalar> A = A0;
    canonicalize(A);

    DenseMatrix<Scalar> B;
    DenseMatrix<Scalar> Bt;
    const bool constrained = cfg.method == Method::CLAIR && cfg.transfer.use_constraints;
    if (constrained) {
        B = cfg.transfer.constraint_vectors.cols() > 0 ? cfg.transfer.constraint_vectors
                                                       : DenseMatrix<Scalar>::Ones(A.rows(), 1);
        if (B.rows() != A.rows()) throw DimensionError("setup: constraint vectors rows");
        Bt = B;
    }

    while (static_cast<int>(H.levels.size()) + 1 < cfg.max_levels && A.rows() > cfg.max_coarse) {
        CfSplitting splitting = detail::coarsen(A, cfg);
        if (splitting.c_count == 0 || splitting.c_count >= A.rows()) break;

        Level<Scalar> lvl;
        lvl.relax_weight = detail::jacobi_weight(A, cfg.spectral_iters);
        switch (cfg.method) {
        case Method::lAIR: {
            lvl.P = classical_interpolation(A, classical_strength(A, cfg.strength_theta), splitting);
            lvl.R = lair_restriction(A, splitting,
                                     lair_restriction_pattern(A, splitting, cfg.restriction_theta, cfg.restriction_degree));
            break;
        }
        case Method::ClassicalRS: {
            lvl.P = classical_interpolation(A, classical_strength(A, cfg.strength_theta), splitting);
            lvl.R = {transpose(lvl.P.matrix), splitting, {}};
            break;
        }
        case Method::CLAIR: {
            if (constrained)
                lvl.constraints = smooth_constraints(A, B, cfg.transfer.constraint_smoothing_steps, splitting, lvl.relax_weight);
            lvl.P = detail::clair_side(A, splitting, lvl.constraints, cfg);
            if (cfg.transfer.build_R_from == RestrictionSource::PTranspose) {
                lvl.R = {transpose(lvl.P.matrix), splitting, {}};
            } else {
                const SparseMatrix<Scalar> At = transpose(A);
                if (constrained)
                    lvl.constraints_transpose =
                        smooth_constraints(At, Bt, cfg.transfer.constraint_smoothing_steps, splitting,
                                           detail::jacobi_weight(At, cfg.spectral_iters));
                TransferOperator<Scalar> Pt = detail::clair_side(At, splitting, lvl.constraints_transpose, cfg);
                lvl.R = {transpose(Pt.matrix), splitting, Pt.diagnostics};
            }
            break;
        }
        }
        lvl.splitting = splitting;
        SparseMatrix<Scalar> Ac = triple_product(lvl.R.matrix, A, lvl.P.matrix);
        if (cfg.filter_coarse && cfg.drop_tol > Scalar(0)) Ac = filter_small(Ac, cfg.drop_tol);
        if (constrained) {
            B = inject(lvl.constraints, splitting);
            Bt = cfg.transfer.build_R_from == RestrictionSource::PTranspose ? B : inject(lvl.constraints_transpose, splitting);
        }
        lvl.A = std::move(A);
        H.levels.push_back(std::move(lvl));
        A = std::move(Ac);
    }
    H.coarse_A = A;
    H.coarse_solver = LuFactor<Scalar>(to_dense(A));
    return H;
}

/// Sum of nnz(A_k) / nnz(A_0) over all levels.
template <typename Scalar>
double operator_complexity(const Hierarchy<Scalar>& H) {
    const double base = static_cast<double>(H.op(0).nonZeros());
    double oc = 0.0;
    for (int k = 0; k < H.num_levels(); ++k) oc += static_cast<double>(H.op(k).nonZeros()) / base;
    return oc;
}

template <typename Scalar>
double grid_complexity(const Hierarchy<Scalar>& H) {
    const double base = static_cast<double>(H.op(0).rows());
    double gc = 0.0;
    for (int k = 0; k < H.num_levels(); ++k) gc += static_cast<double>(H.op(k).rows()) / base;
    return gc;
}

namespace detail {

template <typename Scalar>
void vcycle_level(const Hierarchy<Scalar>& H, int k, const Vector<Scalar>& b, Vector<Scalar>& x) {
    if (k == static_cast<int>(H.levels.size())) {
        x = H.coarse_solver.solve(b);
        return;
    }
    const Level<Scalar>& L = H.levels[static_cast<std::size_t>(k)];
    const RelaxConfig<Scalar>& rc = H.config.relax;
    relax(L.A, x, b, L.splitting, L.relax_weight, rc.pattern);
    const Vector<Scalar> r = b - spmv(L.A, x);
    const Vector<Scalar> bc = spmv(L.R.matrix, r);
    Vector<Scalar> ec = Vector<Scalar>::Zero(bc.size());
    vcycle_level(H, k + 1, bc, ec);
    x += spmv(L.P.matrix, ec);
    const RelaxPattern post = rc.pattern == RelaxPattern::CFF ? RelaxPattern::FFC : rc.pattern;
    relax(L.A, x, b, L.splitting, rc.weighted_postsmoothing ? L.relax_weight : Scalar(1), post);
}

} // namespace detail

/// One V(1,1) cycle starting from x0.
template <typename Scalar>
Vector<Scalar> vcycle(const Hierarchy<Scalar>& H, const Vector<Scalar>& b, const Vector<Scalar>& x0) {
    if (b.size() != H.op(0).rows() || x0.size() != b.size()) throw DimensionError("vcycle: vector sizes");
    Vector<Scalar> x = x0;
    detail::vcycle_level(H, 0, b, x);
    return x;
}

/// Hierarchy as a preconditioner: one V-cycle from a zero guess.
template <typename Scalar>
auto as_preconditioner(const Hierarchy<Scalar>& H) {
    return [&H](const Vector<Scalar>& r) { return vcycle(H, r, Vector<Scalar>(Vector<Scalar>::Zero(r.size()))); };
}

} // namespace clair

#endif
