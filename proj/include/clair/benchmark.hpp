#ifndef CLAIR_BENCHMARK_HPP
#define CLAIR_BENCHMARK_HPP

#include "clair/hierarchy.hpp"
#include "clair/krylov.hpp"
#include "clair/problems.hpp"

#include "json.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace clair {

enum class ToleranceMode { Relative, AbsoluteScaled };

struct RunManifest {
    ProblemSpec problem;
    SolverConfig<double> solver = SolverConfig<double>::clair_symmetric();
    KrylovConfig krylov;
    ToleranceMode tolerance_mode = ToleranceMode::Relative;
    /// AbsoluteScaled: tolerance at tolerance_base_n, grown per refinement.
    double tolerance_base = 1e-9;
    int tolerance_base_n = 32;
    std::uint64_t seed = 0;
    /// Empty disables artifact output.
    std::string output_dir;
    std::string label;
};

/// Named solver configurations: lair, lair-poisson, lair-nonsym, clair,
/// clair-nonsym-fc, clair-nonsym-agg, classical.
SolverConfig<double> solver_preset(const std::string& name);
std::vector<std::string> solver_preset_names();

void to_json(nlohmann::json& j, const ProblemSpec& p);
void from_json(const nlohmann::json& j, ProblemSpec& p);
void to_json(nlohmann::json& j, const SolverConfig<double>& c);
void from_json(const nlohmann::json& j, SolverConfig<double>& c);
void to_json(nlohmann::json& j, const KrylovConfig& c);
void from_json(const nlohmann::json& j, KrylovConfig& c);
void to_json(nlohmann::json& j, const RunManifest& m);
void from_json(const nlohmann::json& j, RunManifest& m);

std::string manifest_to_string(const RunManifest& m);
RunManifest manifest_from_string(const std::string& text);
RunManifest load_manifest(const std::string& path);
/// 16 hex digits of FNV-1a over the canonical JSON dump.
std::string manifest_hash(const RunManifest& m);

/// Uniform [-1, 1) entries from a seeded mt19937_64 with 53-bit mantissas.
Vectord random_initial_guess(int n, std::uint64_t seed);

/// Krylov tolerance implied by the manifest for an n-per-axis problem.
KrylovConfig effective_krylov(const RunManifest& m);

struct LevelStats {
    int n = 0;
    long nnz = 0;
    double relax_weight = 1.0;
    int singular_blocks = 0;
    int skipped_constraint_rows = 0;
};

struct BenchmarkResult {
    ConvergenceReport report;
    std::vector<LevelStats> levels;
    double operator_complexity = 0.0;
    double grid_complexity = 0.0;
    std::string manifest_hash;
    bool dnc = false;
    std::string error;
};

template <typename Scalar>
std::vector<LevelStats> level_stats(const Hierarchy<Scalar>& H) {
    std::vector<LevelStats> out;
    for (int k = 0; k < H.num_levels(); ++k) {
        LevelStats s;
        s.n = static_cast<int>(H.op(k).rows());
        s.nnz = static_cast<long>(H.op(k).nonZeros());
        if (k < static_cast<int>(H.levels.size())) {
            const auto& L = H.levels[static_cast<std::size_t>(k)];
            s.relax_weight = static_cast<double>(L.relax_weight);
            s.singular_blocks = L.P.diagnostics.singular_blocks + L.R.diagnostics.singular_blocks;
            s.skipped_constraint_rows = L.P.diagnostics.skipped_constraint_rows + L.R.diagnostics.skipped_constraint_rows;
        }
        out.push_back(s);
    }
    return out;
}

nlohmann::json hierarchy_summary_json(const std::vector<LevelStats>& levels, double oc, double gc);
nlohmann::json splitting_json(const CfSplitting& s);

/// Writes <prefix>.mtx and <prefix>.json (splitting plus config hash).
void export_transfer(const std::string& prefix, const SparseMatrixd& M, const CfSplitting& splitting,
                     const std::string& config_hash);

/// Builds the problem, optionally prescales, sets up the hierarchy and runs
/// the accelerated solve with b = 0 and a seeded random guess. Writes
/// report.json and history.csv to output_dir when set.
BenchmarkResult run_benchmark(const RunManifest& m);

nlohmann::json result_json(const RunManifest& m, const BenchmarkResult& r);

struct SweepSpec {
    RunManifest base;
    /// "n" sets nx = ny = nz; otherwise a JSON pointer into the manifest,
    /// e.g. "/problem/alpha".
    std::string axis;
    std::vector<nlohmann::json> values;
    /// Preset names; empty runs base.solver under the name "base".
    std::vector<std::string> solvers;
};

struct SweepRow {
    std::string axis_value;
    std::string solver;
    std::string manifest_hash;
    BenchmarkResult result;
};

std::vector<SweepRow> run_sweep(const SweepSpec& spec);
void to_json(nlohmann::json& j, const SweepSpec& s);
void from_json(const nlohmann::json& j, SweepSpec& s);
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

} // namespace clair

#endif
