#include "clair/analysis.hpp"

#include "json.hpp"

#include <Eigen/Eigenvalues>

#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace clair {

namespace {

void require_size(Eigen::Index n) {
    if (n > kAnalysisMaxSize)
        throw std::invalid_argument("analysis: dense size " + std::to_string(n) + " exceeds cap " +
                                    std::to_string(kAnalysisMaxSize));
}

DenseMatrixd symmetrize(const DenseMatrixd& M) { return 0.5 * (M + M.transpose()); }

struct Projection {
    DenseMatrixd complement; // I - Pi
    double scale = 1.0;      // ||calA||^{2 beta - eta}
    DenseMatrixd half_eta;   // calA^{eta/2}
    DenseMatrixd two_beta;   // calA^{2 beta}
};

Projection prepare(const DenseMatrixd& T, const SpdPowers& pw, double beta, double eta) {
    if (beta < 0.0 || eta < 0.0) throw std::invalid_argument("fap: beta and eta must be >= 0");
    Projection p;
    const Eigen::Index n = T.rows();
    p.complement = DenseMatrixd::Identity(n, n) - fap_projector(T, pw.power(eta));
    p.scale = std::pow(pw.norm(), 2.0 * beta - eta);
    p.half_eta = pw.power(0.5 * eta);
    p.two_beta = pw.power(2.0 * beta);
    return p;
}

void check_shapes(const DenseMatrixd& T, const DenseMatrixd& calA) {
    if (calA.rows() != calA.cols() || T.rows() != calA.rows()) throw DimensionError("fap: T and calA shapes");
    require_size(calA.rows());
}

/// Constants for every column of V at once.
Vectord constants_for(const Projection& p, const DenseMatrixd& V) {
    const DenseMatrixd E = p.half_eta * (p.complement * V);
    const Vectord num = E.colwise().squaredNorm().transpose();
    const Vectord den = V.cwiseProduct(p.two_beta * V).colwise().sum().transpose();
    if (!(den.array() > 0.0).all()) throw std::invalid_argument("fap_constant: zero vector");
    return p.scale * num.cwiseQuotient(den);
}

double kmax_for(const Projection& p, const SpdPowers& pw, double beta) {
    const DenseMatrixd M = p.half_eta * (p.complement * pw.power(-beta));
    Eigen::SelfAdjointEigenSolver<DenseMatrixd> es(M.transpose() * M, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw ConvergenceError("fap_kmax: eigensolve failed");
    return p.scale * std::max(0.0, es.eigenvalues().maxCoeff());
}

} // namespace

SpdSurrogate build_spd_surrogate(const DenseMatrixd& A) {
    if (A.rows() != A.cols()) throw DimensionError("build_spd_surrogate: matrix is not square");
    require_size(A.rows());
    SpdSurrogate s;
    s.svd = svd(A);
    const Vectord& sig = s.svd.singular_values;
    if (sig.size() == 0 || !(sig[0] >= 1e-12 * sig[sig.size() - 1]) || sig[0] == 0.0)
        throw std::runtime_error("build_spd_surrogate: matrix is numerically singular");
    s.Q = s.svd.V * s.svd.U.transpose();
    s.QA = symmetrize(s.svd.V * sig.asDiagonal() * s.svd.V.transpose());
    s.AQ = symmetrize(s.svd.U * sig.asDiagonal() * s.svd.U.transpose());
    return s;
}

SpdPowers::SpdPowers(const DenseMatrixd& M) {
    Eigen::SelfAdjointEigenSolver<DenseMatrixd> es(symmetrize(M));
    if (es.info() != Eigen::Success) throw ConvergenceError("SpdPowers: eigendecomposition failed");
    vectors_ = es.eigenvectors();
    values_ = es.eigenvalues();
    lambda_max_ = values_.size() ? values_.maxCoeff() : 0.0;
    if (!(lambda_max_ > 0.0)) throw std::invalid_argument("SpdPowers: matrix is not positive definite");
    values_ = values_.cwiseMax(1e-14 * lambda_max_);
}

DenseMatrixd SpdPowers::power(double p) const {
    if (p == 0.0) return DenseMatrixd::Identity(vectors_.rows(), vectors_.cols());
    const Vectord d = values_.array().pow(p);
    return symmetrize(vectors_ * d.asDiagonal() * vectors_.transpose());
}

DenseMatrixd fap_projector(const DenseMatrixd& T, const DenseMatrixd& M) {
    if (M.rows() != T.rows() || M.cols() != T.rows()) throw DimensionError("fap_projector: shapes");
    const DenseMatrixd TtM = T.transpose() * M;
    const DenseMatrixd G = TtM * T;
    Eigen::LDLT<DenseMatrixd> ldlt(G);
    if (ldlt.info() == Eigen::Success && ldlt.isPositive() && ldlt.rcond() > 1e-14) return T * ldlt.solve(TtM);
    return T * (pinv(G) * TtM);
}

double fap_constant(const DenseMatrixd& T, const DenseMatrixd& calA, double beta, double eta, const Vectord& v) {
    check_shapes(T, calA);
    if (v.size() != calA.rows()) throw DimensionError("fap_constant: vector size");
    return constants_for(prepare(T, SpdPowers(calA), beta, eta), v)[0];
}

double fap_kmax(const DenseMatrixd& T, const DenseMatrixd& calA, double beta, double eta) {
    check_shapes(T, calA);
    const SpdPowers pw(calA);
    return kmax_for(prepare(T, pw, beta, eta), pw, beta);
}

std::vector<ApproxPropertyResult> approximation_report(const SparseMatrixd& A, const SparseMatrixd& transfer,
                                                       AnalysisSide side,
                                                       const std::vector<std::pair<double, double>>& betas_etas) {
    const SpdSurrogate sur = build_spd_surrogate(to_dense(A));
    const DenseMatrixd T = side == AnalysisSide::Left ? DenseMatrixd(to_dense(transfer).transpose()) : to_dense(transfer);
    const DenseMatrixd& calA = side == AnalysisSide::Left ? sur.AQ : sur.QA;
    const DenseMatrixd& vecs = side == AnalysisSide::Left ? sur.svd.U : sur.svd.V;
    check_shapes(T, calA);
    const SpdPowers pw(calA);

    std::vector<ApproxPropertyResult> out;
    for (const auto& [beta, eta] : betas_etas) {
        const Projection p = prepare(T, pw, beta, eta);
        ApproxPropertyResult r;
        r.beta = beta;
        r.eta = eta;
        r.side = side;
        r.singular_values.assign(sur.svd.singular_values.data(),
                                 sur.svd.singular_values.data() + sur.svd.singular_values.size());
        const Vectord c = constants_for(p, vecs);
        r.per_vector_constants.assign(c.data(), c.data() + c.size());
        r.k_max = kmax_for(p, pw, beta);
        out.push_back(std::move(r));
    }
    return out;
}

void write_report_csv(std::ostream& os, const std::vector<ApproxPropertyResult>& results) {
    os << "index,sigma";
    for (const auto& r : results) os << ",K_" << r.beta << '_' << r.eta;
    os << '\n';
    if (results.empty()) return;
    os << std::setprecision(17);
    for (std::size_t i = 0; i < results.front().singular_values.size(); ++i) {
        os << i << ',' << results.front().singular_values[i];
        for (const auto& r : results) os << ',' << r.per_vector_constants[i];
        os << '\n';
    }
}

std::string report_summary_json(const std::vector<ApproxPropertyResult>& results) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& r : results) {
        double mx = 0.0;
        for (double c : r.per_vector_constants) mx = std::max(mx, c);
        j.push_back({{"beta", r.beta},
                     {"eta", r.eta},
                     {"side", r.side == AnalysisSide::Left ? "left" : "right"},
                     {"k_max", r.k_max},
                     {"max_per_vector", mx},
                     {"n", r.singular_values.size()}});
    }
    return j.dump(2);
}

} // namespace clair
