#ifndef CLAIR_KRYLOV_HPP
#define CLAIR_KRYLOV_HPP

#include "clair/kernels.hpp"
#include "clair/sparse.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace clair {

enum class KrylovMethod { CG, GMRES };

struct KrylovConfig {
    KrylovMethod method = KrylovMethod::CG;
    double rel_tol = 1e-8;
    double abs_tol = 1e-300;
    int max_iters = 100;
    /// GMRES restart length; 0 means no restart within max_iters.
    int restart = 0;

    void validate() const {
        if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw std::invalid_argument("KrylovConfig: tolerances must be positive");
        if (max_iters < 0) throw std::invalid_argument("KrylovConfig: negative max_iters");
        if (restart < 0) throw std::invalid_argument("KrylovConfig: negative restart");
    }
};

struct ConvergenceReport {
    int iterations = 0;
    std::vector<double> residual_history;
    double gamma = 0.0;
    bool converged = false;
    double oc = 1.0;
    double work_per_digit = 0.0;
    double setup_seconds = 0.0;
    double solve_seconds = 0.0;
};

/// (||r_k|| / ||r_0||)^(1/k); 0 when r_0 = 0 or no iterations ran.
inline double convergence_factor(const std::vector<double>& history) {
    if (history.size() < 2 || history.front() == 0.0) return 0.0;
    const double k = static_cast<double>(history.size() - 1);
    return std::pow(history.back() / history.front(), 1.0 / k);
}

/// 3.5 * OC / |log10(gamma)|; infinite when gamma >= 1, zero when gamma = 0.
inline double work_per_digit(double oc, double gamma) {
    if (gamma <= 0.0) return 0.0;
    if (gamma >= 1.0) return std::numeric_limits<double>::infinity();
    return 3.5 * oc / std::abs(std::log10(gamma));
}

inline void finalize_report(ConvergenceReport& rep, double oc) {
    rep.gamma = convergence_factor(rep.residual_history);
    rep.oc = oc;
    rep.work_per_digit = work_per_digit(oc, rep.gamma);
}

/// Identity preconditioner.
template <typename Scalar>
struct IdentityPreconditioner {
    Vector<Scalar> operator()(const Vector<Scalar>& r) const { return r; }
};

/// Preconditioned conjugate gradients. Stops once ||r|| <= max(abs_tol,
/// rel_tol * ||b - A x0||).
template <typename Scalar, typename Precond>
ConvergenceReport pcg(const SparseMatrix<Scalar>& A, const Vector<Scalar>& b, Vector<Scalar>& x, Precond&& M,
                      const KrylovConfig& cfg) {
    cfg.validate();
    if (A.rows() != A.cols() || b.size() != A.rows() || x.size() != A.cols()) throw DimensionError("pcg: sizes");
    const auto t0 = std::chrono::steady_clock::now();
    ConvergenceReport rep;
    Vector<Scalar> r = b - spmv(A, x);
    double rnorm = static_cast<double>(r.norm());
    rep.residual_history.push_back(rnorm);
    const double tol = std::max(cfg.abs_tol, cfg.rel_tol * rnorm);
    if (rnorm <= tol) {
        rep.converged = true;
    } else {
        Vector<Scalar> z = M(r);
        Vector<Scalar> p = z;
        Scalar rz = r.dot(z);
        for (int it = 1; it <= cfg.max_iters; ++it) {
            const Vector<Scalar> Ap = spmv(A, p);
            const Scalar pAp = p.dot(Ap);
            if (!(pAp > Scalar(0)))
                throw std::runtime_error("pcg: non-positive curvature p^T A p at iteration " + std::to_string(it));
            const Scalar alpha = rz / pAp;
            x += alpha * p;
            r -= alpha * Ap;
            rnorm = static_cast<double>(r.norm());
            rep.residual_history.push_back(rnorm);
            rep.iterations = it;
            if (rnorm <= tol) {
                rep.converged = true;
                break;
            }
            z = M(r);
            const Scalar rz_new = r.dot(z);
            p = z + (rz_new / rz) * p;
            rz = rz_new;
        }
    }
    rep.solve_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    finalize_report(rep, 1.0);
    return rep;
}

/// Right-preconditioned GMRES with Givens rotations; the monitored residual
/// is the true residual ||b - A x||.
template <typename Scalar, typename Precond>
ConvergenceReport gmres(const SparseMatrix<Scalar>& A, const Vector<Scalar>& b, Vector<Scalar>& x, Precond&& M,
                        const KrylovConfig& cfg) {
    cfg.validate();
    if (A.rows() != A.cols() || b.size() != A.rows() || x.size() != A.cols()) throw DimensionError("gmres: sizes");
    const auto t0 = std::chrono::steady_clock::now();
    ConvergenceReport rep;
    Vector<Scalar> r = b - spmv(A, x);
    double rnorm = static_cast<double>(r.norm());
    rep.residual_history.push_back(rnorm);
    const double tol = std::max(cfg.abs_tol, cfg.rel_tol * rnorm);
    const Eigen::Index n = A.rows();
    int total = 0;
    if (rnorm <= tol) rep.converged = true;

    while (!rep.converged && total < cfg.max_iters) {
        const int m = cfg.restart > 0 ? std::min(cfg.restart, cfg.max_iters - total) : cfg.max_iters - total;
        DenseMatrix<Scalar> V(n, m + 1);
        DenseMatrix<Scalar> Z(n, m);
        DenseMatrix<Scalar> Hm = DenseMatrix<Scalar>::Zero(m + 1, m);
        Vector<Scalar> cs = Vector<Scalar>::Zero(m);
        Vector<Scalar> sn = Vector<Scalar>::Zero(m);
        Vector<Scalar> g = Vector<Scalar>::Zero(m + 1);
        const Scalar beta = r.norm();
        V.col(0) = r / beta;
        g[0] = beta;
        int j = 0;
        bool breakdown = false;
        for (; j < m; ++j) {
            Z.col(j) = M(Vector<Scalar>(V.col(j)));
            Vector<Scalar> w = spmv(A, Z.col(j));
            for (int i = 0; i <= j; ++i) {
                Hm(i, j) = V.col(i).dot(w);
                w -= Hm(i, j) * V.col(i);
            }
            Hm(j + 1, j) = w.norm();
            const bool happy = Hm(j + 1, j) <= Scalar(1e-14) * beta;
            if (!happy) V.col(j + 1) = w / Hm(j + 1, j);
            for (int i = 0; i < j; ++i) {
                const Scalar t = cs[i] * Hm(i, j) + sn[i] * Hm(i + 1, j);
                Hm(i + 1, j) = -sn[i] * Hm(i, j) + cs[i] * Hm(i + 1, j);
                Hm(i, j) = t;
            }
            const Scalar denom = std::hypot(Hm(j, j), Hm(j + 1, j));
            cs[j] = denom == Scalar(0) ? Scalar(1) : Hm(j, j) / denom;
            sn[j] = denom == Scalar(0) ? Scalar(0) : Hm(j + 1, j) / denom;
            Hm(j, j) = cs[j] * Hm(j, j) + sn[j] * Hm(j + 1, j);
            Hm(j + 1, j) = Scalar(0);
            g[j + 1] = -sn[j] * g[j];
            g[j] = cs[j] * g[j];
            ++total;
            rep.iterations = total;
            const double est = static_cast<double>(std::abs(g[j + 1]));
            if (est <= tol || happy) {
                ++j;
                breakdown = happy;
                break;
            }
            rep.residual_history.push_back(est);
        }
        const Vector<Scalar> y = Hm.topLeftCorner(j, j).template triangularView<Eigen::Upper>().solve(g.head(j));
        x += Z.leftCols(j) * y;
        r = b - spmv(A, x);
        rnorm = static_cast<double>(r.norm());
        // replace the last estimate of this cycle by the true residual
        if (static_cast<int>(rep.residual_history.size()) == total + 1) rep.residual_history.back() = rnorm;
        else rep.residual_history.push_back(rnorm);
        if (rnorm <= tol) rep.converged = true;
        else if (breakdown) break;
    }
    rep.solve_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    finalize_report(rep, 1.0);
    return rep;
}

template <typename Scalar, typename Precond>
ConvergenceReport krylov_solve(const SparseMatrix<Scalar>& A, const Vector<Scalar>& b, Vector<Scalar>& x, Precond&& M,
                               const KrylovConfig& cfg) {
    return cfg.method == KrylovMethod::CG ? pcg(A, b, x, M, cfg) : gmres(A, b, x, M, cfg);
}

} // namespace clair

#endif
