#include "clair/analysis.hpp"
#include "clair/problems.hpp"
#include "test_util.hpp"

#include "json.hpp"

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include <sstream>

using namespace clair;

namespace {

DenseMatrixd random_spd_dense(int n, unsigned seed) {
    std::srand(seed);
    const DenseMatrixd X = DenseMatrixd::Random(n, n);
    return X * X.transpose() + DenseMatrixd::Identity(n, n);
}

/// K_max through a general SVD instead of the symmetric eigen path.
double kmax_oracle(const DenseMatrixd& T, const DenseMatrixd& calA, double beta, double eta) {
    Eigen::SelfAdjointEigenSolver<DenseMatrixd> es(calA);
    auto pw = [&](double p) {
        return DenseMatrixd(es.eigenvectors() * es.eigenvalues().array().pow(p).matrix().asDiagonal() *
                            es.eigenvectors().transpose());
    };
    const DenseMatrixd M = pw(eta);
    const DenseMatrixd Pi = T * (T.transpose() * M * T).inverse() * T.transpose() * M;
    const DenseMatrixd E = pw(0.5 * eta) * (DenseMatrixd::Identity(T.rows(), T.rows()) - Pi) * pw(-beta);
    const double s = Eigen::JacobiSVD<DenseMatrixd>(E).singularValues()(0);
    return std::pow(es.eigenvalues().maxCoeff(), 2 * beta - eta) * s * s;
}

} // namespace

TEST(Surrogate, SpdInputIsItsOwnSurrogate) {
    const SparseMatrixd A = poisson_2d(5, 5, false);
    const SpdSurrogate s = build_spd_surrogate(to_dense(A));
    EXPECT_LE((s.QA - to_dense(A)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((s.AQ - to_dense(A)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((s.Q - DenseMatrixd::Identity(25, 25)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Surrogate, NonsymmetricIdentities) {
    ProblemSpec spec;
    spec.kind = ProblemKind::AdvDiffConstant;
    spec.nx = spec.ny = 6;
    spec.alpha = 0.1;
    const DenseMatrixd A = to_dense(generate(spec));
    const SpdSurrogate s = build_spd_surrogate(A);
    const double scale = A.cwiseAbs().maxCoeff();
    EXPECT_LE((s.Q * A - s.QA).cwiseAbs().maxCoeff(), 1e-11 * scale);
    EXPECT_LE((A * s.Q - s.AQ).cwiseAbs().maxCoeff(), 1e-11 * scale);
    EXPECT_LE((s.QA * s.QA - A.transpose() * A).cwiseAbs().maxCoeff(), 1e-10 * scale * scale);
    EXPECT_LE((s.AQ * s.AQ - A * A.transpose()).cwiseAbs().maxCoeff(), 1e-10 * scale * scale);
    EXPECT_LE((s.Q.transpose() * s.Q - DenseMatrixd::Identity(36, 36)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_GT(Eigen::SelfAdjointEigenSolver<DenseMatrixd>(s.QA).eigenvalues().minCoeff(), 0.0);
}

TEST(Surrogate, SingularAndOversizedInputRejected) {
    EXPECT_THROW(build_spd_surrogate(DenseMatrixd::Zero(3, 3)), std::runtime_error);
    EXPECT_THROW(build_spd_surrogate(DenseMatrixd::Identity(kAnalysisMaxSize + 1, kAnalysisMaxSize + 1)),
                 std::invalid_argument);
}

TEST(Projector, IdempotentAndMOrthogonal) {
    const DenseMatrixd M = random_spd_dense(12, 71);
    std::srand(72);
    const DenseMatrixd T = DenseMatrixd::Random(12, 4);
    const DenseMatrixd Pi = fap_projector(T, M);
    EXPECT_LE((Pi * Pi - Pi).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LE((Pi * T - T).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LE((Pi.transpose() * M - M * Pi).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Projector, RankDeficientTransferFallsBackToPseudoinverse) {
    const DenseMatrixd M = random_spd_dense(8, 73);
    std::srand(74);
    DenseMatrixd T(8, 3);
    T.leftCols(2) = DenseMatrixd::Random(8, 2);
    T.col(2) = T.col(0) + T.col(1);
    const DenseMatrixd Pi = fap_projector(T, M);
    EXPECT_LE((Pi * Pi - Pi).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LE((Pi * T - T).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(FapConstant, VanishesOnRangeAndBoundedByKmax) {
    const DenseMatrixd calA = random_spd_dense(10, 75);
    std::srand(76);
    const DenseMatrixd T = DenseMatrixd::Random(10, 3);
    for (const auto& [beta, eta] : std::vector<std::pair<double, double>>{{0.5, 0.0}, {1.0, 1.0}, {1.0, 0.0}}) {
        EXPECT_NEAR(fap_constant(T, calA, beta, eta, T.col(1)), 0.0, 1e-10);
        const double km = fap_kmax(T, calA, beta, eta);
        EXPECT_NEAR(km, kmax_oracle(T, calA, beta, eta), 1e-8 * km);
        for (int k = 0; k < 20; ++k) EXPECT_LE(fap_constant(T, calA, beta, eta, Vectord::Random(10)), km * (1 + 1e-10));
    }
    EXPECT_THROW(fap_constant(T, calA, -1.0, 0.0, Vectord::Ones(10)), std::invalid_argument);
    EXPECT_THROW(fap_constant(T, calA, 0.5, 0.0, Vectord::Zero(10)), std::invalid_argument);
}

TEST(FapKmax, SpectralTransferGivesEigenvalueRatio) {
    // T spanning the k lowest eigenvectors: K_max = lambda_max / lambda_{k+1} for (1/2, 0)
    const DenseMatrixd calA = random_spd_dense(15, 77);
    Eigen::SelfAdjointEigenSolver<DenseMatrixd> es(calA);
    const Vectord lam = es.eigenvalues();
    for (int k : {1, 4, 10}) {
        const DenseMatrixd T = es.eigenvectors().leftCols(k);
        EXPECT_NEAR(fap_kmax(T, calA, 0.5, 0.0), lam(14) / lam(k), 1e-9 * lam(14) / lam(k));
        // the strong property has the same value for an invariant subspace
        EXPECT_NEAR(fap_kmax(T, calA, 1.0, 1.0), lam(14) / lam(k), 1e-9 * lam(14) / lam(k));
    }
    EXPECT_NEAR(fap_kmax(DenseMatrixd::Identity(15, 15), calA, 0.5, 0.0), 0.0, 1e-10);
}

TEST(Report, ShapesCsvAndJson) {
    const SparseMatrixd A = poisson_2d(6, 6);
    std::vector<Triplet<double>> t;
    for (int c = 0; c < 18; ++c) {
        t.emplace_back(2 * c, c, 1.0);
        t.emplace_back(2 * c + 1, c, 1.0);
    }
    const SparseMatrixd P = from_triplets<double>(36, 18, t);
    const auto rep = approximation_report(A, P, AnalysisSide::Right);
    ASSERT_EQ(rep.size(), 2u);
    for (const auto& r : rep) {
        EXPECT_EQ(r.per_vector_constants.size(), 36u);
        EXPECT_TRUE(std::is_sorted(r.singular_values.begin(), r.singular_values.end()));
        for (double c : r.per_vector_constants) EXPECT_LE(c, r.k_max * (1 + 1e-10));
    }
    const auto left = approximation_report(A, SparseMatrixd(transpose(P)), AnalysisSide::Left);
    EXPECT_NEAR(left[0].k_max, rep[0].k_max, 1e-9 * rep[0].k_max); // SPD: both sides agree

    std::ostringstream os;
    write_report_csv(os, rep);
    std::istringstream is(os.str());
    std::string header;
    std::getline(is, header);
    EXPECT_EQ(header, "index,sigma,K_0.5_0,K_1_1");
    int rows = 0;
    for (std::string line; std::getline(is, line);) ++rows;
    EXPECT_EQ(rows, 36);

    const auto j = nlohmann::json::parse(report_summary_json(rep));
    ASSERT_EQ(j.size(), 2u);
    EXPECT_EQ(j[0]["side"], "right");
    EXPECT_NEAR(j[1]["k_max"].get<double>(), rep[1].k_max, 1e-12 * rep[1].k_max);
}
