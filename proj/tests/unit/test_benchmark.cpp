#include "clair/benchmark.hpp"
#include "clair/matrix_market.hpp"

#include "json.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace clair;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("clair_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

int run_cli(const std::string& args, const fs::path& stdout_file) {
    const std::string cmd = std::string(CLAIR_CLI_PATH) + " " + args + " > " + stdout_file.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

RunManifest small_manifest() {
    RunManifest m;
    m.problem.kind = ProblemKind::Poisson2D;
    m.problem.nx = m.problem.ny = 16;
    m.solver = solver_preset("clair");
    m.seed = 3;
    m.label = "small";
    return m;
}

} // namespace

TEST(Manifest, RoundTripPreservesHash) {
    RunManifest m = small_manifest();
    m.solver = solver_preset("clair-nonsym-agg");
    m.krylov.method = KrylovMethod::GMRES;
    m.problem.kind = ProblemKind::AdvDiffRecirculating;
    m.problem.alpha = 0.1;
    m.tolerance_mode = ToleranceMode::AbsoluteScaled;
    const RunManifest back = manifest_from_string(manifest_to_string(m));
    EXPECT_EQ(manifest_to_string(back), manifest_to_string(m));
    EXPECT_EQ(manifest_hash(back), manifest_hash(m));
    EXPECT_EQ(manifest_hash(m).size(), 16u);

    RunManifest other = m;
    other.seed = 4;
    EXPECT_NE(manifest_hash(other), manifest_hash(m));
}

TEST(Manifest, PresetKeyAndUnknownPreset) {
    const RunManifest m = manifest_from_string(R"({"problem": {"kind": "poisson2d", "nx": 8},
                                                  "solver": {"preset": "lair-poisson"}})");
    EXPECT_EQ(m.problem.ny, 8);
    EXPECT_EQ(m.solver.method, Method::lAIR);
    EXPECT_EQ(m.solver.restriction_degree, 1);
    EXPECT_THROW(solver_preset("nope"), std::invalid_argument);
    EXPECT_THROW(manifest_from_string("{not json"), std::exception);
}

TEST(Manifest, EveryPresetSurvivesSerialization) {
    for (const std::string& name : solver_preset_names()) {
        RunManifest m = small_manifest();
        m.solver = solver_preset(name);
        EXPECT_EQ(manifest_to_string(manifest_from_string(manifest_to_string(m))), manifest_to_string(m)) << name;
    }
}

TEST(InitialGuess, DeterministicAndInRange) {
    const Vectord a = random_initial_guess(1000, 7);
    EXPECT_EQ(a, random_initial_guess(1000, 7));
    EXPECT_NE(a, random_initial_guess(1000, 8));
    EXPECT_LE(a.cwiseAbs().maxCoeff(), 1.0);
    EXPECT_NEAR(a.mean(), 0.0, 0.1);
}

TEST(Tolerance, AbsoluteScaledGrowsWithRefinement) {
    RunManifest m = small_manifest();
    m.tolerance_mode = ToleranceMode::AbsoluteScaled;
    m.tolerance_base = 1e-9;
    m.tolerance_base_n = 32;
    m.problem.nx = 32;
    EXPECT_DOUBLE_EQ(effective_krylov(m).abs_tol, 1e-9);
    m.problem.nx = 128;
    EXPECT_DOUBLE_EQ(effective_krylov(m).abs_tol, 4e-9);
    m.problem.kind = ProblemKind::Poisson3D;
    m.problem.nx = 64;
    EXPECT_NEAR(effective_krylov(m).abs_tol, 1e-9 * std::sqrt(8.0), 1e-20);
    m.tolerance_mode = ToleranceMode::Relative;
    EXPECT_EQ(effective_krylov(m).rel_tol, m.krylov.rel_tol);
}

TEST(RunBenchmark, ConvergesAndWritesArtifacts) {
    RunManifest m = small_manifest();
    const fs::path dir = scratch("run");
    m.output_dir = dir.string();
    const BenchmarkResult r = run_benchmark(m);
    EXPECT_TRUE(r.error.empty()) << r.error;
    EXPECT_FALSE(r.dnc);
    EXPECT_GT(r.operator_complexity, 1.0);
    EXPECT_EQ(r.manifest_hash, manifest_hash(m));

    const auto report = nlohmann::json::parse(slurp(dir / "report.json"));
    EXPECT_EQ(report["status"], "converged");
    EXPECT_EQ(report["manifest_hash"], r.manifest_hash);
    EXPECT_EQ(report["residual_history"].size(), static_cast<std::size_t>(r.report.iterations) + 1);
    EXPECT_EQ(manifest_hash(load_manifest((dir / "manifest.json").string())), r.manifest_hash);
    EXPECT_TRUE(fs::exists(dir / "history.csv"));

    const SparseMatrixd P = read_matrix_market((dir / "level0_P.mtx").string());
    const auto side = nlohmann::json::parse(slurp(dir / "level0_P.json"));
    EXPECT_EQ(P.rows(), 256);
    EXPECT_EQ(P.cols(), side["splitting"]["c_count"].get<int>());
    EXPECT_EQ(side["config_hash"], r.manifest_hash);
    EXPECT_TRUE(fs::exists(dir / "level0_R.mtx"));
}

TEST(RunBenchmark, SameManifestSameHistory) {
    const RunManifest m = small_manifest();
    EXPECT_EQ(run_benchmark(m).report.residual_history, run_benchmark(m).report.residual_history);
}

TEST(RunBenchmark, IterationCapGivesDnc) {
    RunManifest m = small_manifest();
    m.krylov.max_iters = 1;
    const BenchmarkResult r = run_benchmark(m);
    EXPECT_TRUE(r.dnc);
    EXPECT_EQ(result_json(m, r)["status"], "DNC");
}

TEST(Sweep, RowsPerValueAndSolver) {
    SweepSpec spec;
    spec.base = small_manifest();
    spec.base.problem.kind = ProblemKind::AdvDiffConstant;
    spec.base.krylov.method = KrylovMethod::GMRES;
    spec.axis = "/problem/alpha";
    spec.values = {1.0, 0.1};
    spec.solvers = {"lair-nonsym", "clair-nonsym-agg"};
    const auto rows = run_sweep(spec);
    ASSERT_EQ(rows.size(), 4u);
    std::ostringstream os;
    write_sweep_csv(os, rows);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, "axis_value,solver,status,iterations,gamma,operator_complexity,work_per_digit,manifest_hash");
    int n = 0;
    while (std::getline(is, line)) {
        EXPECT_NE(line.find("converged"), std::string::npos) << line;
        ++n;
    }
    EXPECT_EQ(n, 4);
    EXPECT_NE(rows[0].manifest_hash, rows[2].manifest_hash);

    SweepSpec sizes = spec;
    sizes.axis = "n";
    sizes.values = {8, 12};
    sizes.solvers = {"clair-nonsym-agg"};
    const auto by_n = run_sweep(sizes);
    ASSERT_EQ(by_n.size(), 2u);
    EXPECT_LT(by_n[0].result.levels.front().n, by_n[1].result.levels.front().n);
}

TEST(Cli, SolveEmitAndAnalyze) {
    const fs::path dir = scratch("cli");
    const fs::path out = dir / "stdout.txt";
    ASSERT_EQ(run_cli("solve --problem poisson2d -n 16 --solver clair --seed 1", out), 0) << slurp(out);
    const auto summary = nlohmann::json::parse(slurp(out));
    EXPECT_EQ(summary["status"], "converged");

    ASSERT_EQ(run_cli("problems emit --problem advdiff-constant -n 6 --alpha 0.5 -o " + (dir / "adv").string(), out), 0)
        << slurp(out);
    const SparseMatrixd A = read_matrix_market((dir / "adv.mtx").string());
    EXPECT_EQ(A.rows(), 36);
    ProblemSpec spec;
    spec.kind = ProblemKind::AdvDiffConstant;
    spec.nx = spec.ny = 6;
    spec.alpha = 0.5;
    EXPECT_EQ(to_dense(A), to_dense(generate(spec)));
    EXPECT_TRUE(fs::exists(dir / "adv.json"));

    ASSERT_EQ(run_cli("analyze-fap --problem poisson2d -n 8 --solver clair --side right --csv " + (dir / "fap.csv").string() +
                          " --json " + (dir / "fap.json").string(),
                      out),
              0)
        << slurp(out);
    const auto fap = nlohmann::json::parse(slurp(dir / "fap.json"));
    ASSERT_EQ(fap.size(), 2u);
    EXPECT_GT(fap[0]["k_max"].get<double>(), 0.0);

    EXPECT_NE(run_cli("solve --problem nope", out), 0);
    EXPECT_EQ(run_cli("solve --problem poisson2d -n 16 --max-iters 1", out), 2);
}

TEST(Cli, SweepFromFile) {
    const fs::path dir = scratch("cli_sweep");
    SweepSpec spec;
    spec.base = small_manifest();
    spec.axis = "n";
    spec.values = {8, 10};
    spec.solvers = {"clair", "lair-poisson"};
    std::ofstream(dir / "sweep.json") << nlohmann::json(spec).dump();
    const fs::path out = dir / "stdout.txt";
    ASSERT_EQ(run_cli("sweep " + (dir / "sweep.json").string() + " --csv " + (dir / "table.csv").string(), out), 0)
        << slurp(out);
    std::istringstream is(slurp(dir / "table.csv"));
    int lines = 0;
    for (std::string l; std::getline(is, l);) ++lines;
    EXPECT_EQ(lines, 5);
}
