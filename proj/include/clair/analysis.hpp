#ifndef CLAIR_ANALYSIS_HPP
#define CLAIR_ANALYSIS_HPP

#include "clair/kernels.hpp"
#include "clair/sparse.hpp"

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace clair {

/// Dense analysis refuses problems larger than this.
inline constexpr int kAnalysisMaxSize = 2048;

struct SpdSurrogate {
    DenseMatrixd Q;  // V U^T
    DenseMatrixd QA; // V Sigma V^T
    DenseMatrixd AQ; // U Sigma U^T
    SvdResult<double> svd;
};

/// SVD-based symmetric positive definite surrogates of a nonsingular A.
SpdSurrogate build_spd_surrogate(const DenseMatrixd& A);

/// Fractional powers of an SPD matrix through one symmetric eigendecomposition;
/// eigenvalues are clipped below at 1e-14 * lambda_max.
class SpdPowers {
public:
    explicit SpdPowers(const DenseMatrixd& M);
    DenseMatrixd power(double p) const;
    double norm() const { return lambda_max_; }

private:
    DenseMatrixd vectors_;
    Vectord values_;
    double lambda_max_ = 0.0;
};

/// Pi = T (T^T M T)^+ T^T M for SPD M (here M = calA^eta).
DenseMatrixd fap_projector(const DenseMatrixd& T, const DenseMatrixd& M);

/// ||calA||^{2 beta - eta} ||(I - Pi) v||^2_{calA^eta} / ||v||^2_{calA^{2 beta}}.
double fap_constant(const DenseMatrixd& T, const DenseMatrixd& calA, double beta, double eta, const Vectord& v);

/// ||calA||^{2 beta - eta} ||calA^{eta/2} (I - Pi) calA^{-beta}||_2^2.
double fap_kmax(const DenseMatrixd& T, const DenseMatrixd& calA, double beta, double eta);

enum class AnalysisSide { Left, Right };

struct ApproxPropertyResult {
    double beta = 0.0;
    double eta = 0.0;
    AnalysisSide side = AnalysisSide::Left;
    std::vector<double> singular_values; // ascending
    std::vector<double> per_vector_constants;
    double k_max = 0.0;
};

/// Per-singular-vector constants and K_max for each (beta, eta) pair. Left
/// analyzes T = R^T against AQ with the left singular vectors; Right analyzes
/// T = P against QA with the right singular vectors.
std::vector<ApproxPropertyResult> approximation_report(const SparseMatrixd& A, const SparseMatrixd& transfer,
                                                       AnalysisSide side,
                                                       const std::vector<std::pair<double, double>>& betas_etas = {
                                                           {0.5, 0.0}, {1.0, 1.0}});

/// index,sigma,K_<beta>_<eta>,... one row per singular vector.
void write_report_csv(std::ostream& os, const std::vector<ApproxPropertyResult>& results);
std::string report_summary_json(const std::vector<ApproxPropertyResult>& results);

} // namespace clair

#endif
