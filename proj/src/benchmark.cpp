#include "clair/benchmark.hpp"

#include "clair/matrix_market.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>
#include <stdexcept>

namespace clair {

NLOHMANN_JSON_SERIALIZE_ENUM(ProblemKind, {
    {ProblemKind::Identity, "identity"},
    {ProblemKind::Poisson2D, "poisson2d"},
    {ProblemKind::Poisson3D, "poisson3d"},
    {ProblemKind::AnisoDiffusion2D, "aniso2d"},
    {ProblemKind::JumpBoxInBox, "jump-box"},
    {ProblemKind::JumpSawtooth, "jump-sawtooth"},
    {ProblemKind::AdvDiffConstant, "advdiff-constant"},
    {ProblemKind::AdvDiffRecirculating, "advdiff-recirculating"},
})
NLOHMANN_JSON_SERIALIZE_ENUM(Method, {{Method::lAIR, "lair"}, {Method::CLAIR, "clair"}, {Method::ClassicalRS, "classical"}})
NLOHMANN_JSON_SERIALIZE_ENUM(StrengthKind, {{StrengthKind::Classical, "classical"}, {StrengthKind::Symmetric, "symmetric"}})
NLOHMANN_JSON_SERIALIZE_ENUM(CoarsenType, {{CoarsenType::FC, "fc"}, {CoarsenType::Agg, "agg"}})
NLOHMANN_JSON_SERIALIZE_ENUM(InverseType, {{InverseType::ExactLU, "lu"}, {InverseType::Diagonal, "diagonal"}})
NLOHMANN_JSON_SERIALIZE_ENUM(RestrictionSource,
                             {{RestrictionSource::TransposeOfA, "transpose-of-a"}, {RestrictionSource::PTranspose, "p-transpose"}})
NLOHMANN_JSON_SERIALIZE_ENUM(RelaxPattern, {{RelaxPattern::CFF, "cff"},
                                            {RelaxPattern::FFC, "ffc"},
                                            {RelaxPattern::FOnly, "f-only"},
                                            {RelaxPattern::Global, "global"}})
NLOHMANN_JSON_SERIALIZE_ENUM(KrylovMethod, {{KrylovMethod::CG, "cg"}, {KrylovMethod::GMRES, "gmres"}})
NLOHMANN_JSON_SERIALIZE_ENUM(ToleranceMode,
                             {{ToleranceMode::Relative, "relative"}, {ToleranceMode::AbsoluteScaled, "absolute-scaled"}})

namespace {

template <typename T>
void get_opt(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key)) j.at(key).get_to(out);
}

} // namespace

SolverConfig<double> solver_preset(const std::string& name) {
    using C = SolverConfig<double>;
    if (name == "lair") return C::lair_symmetric(2);
    if (name == "lair-poisson") return C::lair_symmetric(1);
    if (name == "lair-nonsym") return C::lair_nonsymmetric();
    if (name == "clair") return C::clair_symmetric();
    if (name == "clair-nonsym-fc") return C::clair_nonsymmetric(CoarsenType::FC);
    if (name == "clair-nonsym-agg") return C::clair_nonsymmetric(CoarsenType::Agg);
    if (name == "classical") return C::classical_rs();
    throw std::invalid_argument("unknown solver preset '" + name + "'");
}

std::vector<std::string> solver_preset_names() {
    return {"lair", "lair-poisson", "lair-nonsym", "clair", "clair-nonsym-fc", "clair-nonsym-agg", "classical"};
}

void to_json(nlohmann::json& j, const ProblemSpec& p) {
    j = {{"kind", p.kind},       {"nx", p.nx},         {"ny", p.ny},           {"nz", p.nz},
         {"epsilon", p.epsilon}, {"phi", p.phi},       {"alpha", p.alpha},     {"d_high", p.d_high},
         {"scale_h", p.scale_h}, {"polygon", p.polygon}};
}

void from_json(const nlohmann::json& j, ProblemSpec& p) {
    get_opt(j, "kind", p.kind);
    get_opt(j, "nx", p.nx);
    p.ny = p.nx;
    p.nz = p.nx;
    get_opt(j, "ny", p.ny);
    get_opt(j, "nz", p.nz);
    get_opt(j, "epsilon", p.epsilon);
    get_opt(j, "phi", p.phi);
    get_opt(j, "alpha", p.alpha);
    get_opt(j, "d_high", p.d_high);
    get_opt(j, "scale_h", p.scale_h);
    get_opt(j, "polygon", p.polygon);
}

void to_json(nlohmann::json& j, const SolverConfig<double>& c) {
    const auto& t = c.transfer;
    j = {{"method", c.method},
         {"strength_theta", c.strength_theta},
         {"agg_strength", c.agg_strength},
         {"restriction_theta", c.restriction_theta},
         {"restriction_degree", c.restriction_degree},
         {"second_pass", c.second_pass},
         {"filter_coarse", c.filter_coarse},
         {"drop_tol", c.drop_tol},
         {"max_levels", c.max_levels},
         {"max_coarse", c.max_coarse},
         {"spectral_iters", c.spectral_iters},
         {"prescale_block", c.prescale_block},
         {"relax", {{"pattern", c.relax.pattern}, {"weighted_postsmoothing", c.relax.weighted_postsmoothing}}},
         {"transfer",
          {{"coarsen_type", t.coarsen_type},
           {"sparsity_degree", t.sparsity_degree},
           {"interp_strength_theta", t.interp_strength_theta},
           {"use_constraints", t.use_constraints},
           {"constraint_smoothing_steps", t.constraint_smoothing_steps},
           {"inverse_type", t.inverse_type},
           {"outer_iterations", t.outer_iterations},
           {"build_R_from", t.build_R_from}}}};
}

void from_json(const nlohmann::json& j, SolverConfig<double>& c) {
    if (j.contains("preset")) c = solver_preset(j.at("preset").get<std::string>());
    get_opt(j, "method", c.method);
    get_opt(j, "strength_theta", c.strength_theta);
    get_opt(j, "agg_strength", c.agg_strength);
    get_opt(j, "restriction_theta", c.restriction_theta);
    get_opt(j, "restriction_degree", c.restriction_degree);
    get_opt(j, "second_pass", c.second_pass);
    get_opt(j, "filter_coarse", c.filter_coarse);
    get_opt(j, "drop_tol", c.drop_tol);
    get_opt(j, "max_levels", c.max_levels);
    get_opt(j, "max_coarse", c.max_coarse);
    get_opt(j, "spectral_iters", c.spectral_iters);
    get_opt(j, "prescale_block", c.prescale_block);
    if (j.contains("relax")) {
        const auto& r = j.at("relax");
        get_opt(r, "pattern", c.relax.pattern);
        get_opt(r, "weighted_postsmoothing", c.relax.weighted_postsmoothing);
    }
    if (j.contains("transfer")) {
        const auto& t = j.at("transfer");
        auto& o = c.transfer;
        get_opt(t, "coarsen_type", o.coarsen_type);
        get_opt(t, "sparsity_degree", o.sparsity_degree);
        get_opt(t, "interp_strength_theta", o.interp_strength_theta);
        get_opt(t, "use_constraints", o.use_constraints);
        get_opt(t, "constraint_smoothing_steps", o.constraint_smoothing_steps);
        get_opt(t, "inverse_type", o.inverse_type);
        get_opt(t, "outer_iterations", o.outer_iterations);
        get_opt(t, "build_R_from", o.build_R_from);
    }
}

void to_json(nlohmann::json& j, const KrylovConfig& c) {
    j = {{"method", c.method},
         {"rel_tol", c.rel_tol},
         {"abs_tol", c.abs_tol},
         {"max_iters", c.max_iters},
         {"restart", c.restart}};
}

void from_json(const nlohmann::json& j, KrylovConfig& c) {
    get_opt(j, "method", c.method);
    get_opt(j, "rel_tol", c.rel_tol);
    get_opt(j, "abs_tol", c.abs_tol);
    get_opt(j, "max_iters", c.max_iters);
    get_opt(j, "restart", c.restart);
}

void to_json(nlohmann::json& j, const RunManifest& m) {
    j = {{"problem", m.problem},
         {"solver", m.solver},
         {"krylov", m.krylov},
         {"tolerance_mode", m.tolerance_mode},
         {"tolerance_base", m.tolerance_base},
         {"tolerance_base_n", m.tolerance_base_n},
         {"seed", m.seed},
         {"output_dir", m.output_dir},
         {"label", m.label}};
}

void from_json(const nlohmann::json& j, RunManifest& m) {
    get_opt(j, "problem", m.problem);
    get_opt(j, "solver", m.solver);
    get_opt(j, "krylov", m.krylov);
    get_opt(j, "tolerance_mode", m.tolerance_mode);
    get_opt(j, "tolerance_base", m.tolerance_base);
    get_opt(j, "tolerance_base_n", m.tolerance_base_n);
    get_opt(j, "seed", m.seed);
    get_opt(j, "output_dir", m.output_dir);
    get_opt(j, "label", m.label);
}

std::string manifest_to_string(const RunManifest& m) { return nlohmann::json(m).dump(2); }

RunManifest manifest_from_string(const std::string& text) { return nlohmann::json::parse(text).get<RunManifest>(); }

RunManifest load_manifest(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open manifest '" + path + "'");
    std::stringstream ss;
    ss << is.rdbuf();
    return manifest_from_string(ss.str());
}

std::string manifest_hash(const RunManifest& m) {
    const std::string text = nlohmann::json(m).dump();
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

Vectord random_initial_guess(int n, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    Vectord x(n);
    for (int i = 0; i < n; ++i) {
        const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
        x[i] = 2.0 * u - 1.0;
    }
    return x;
}

KrylovConfig effective_krylov(const RunManifest& m) {
    KrylovConfig k = m.krylov;
    if (m.tolerance_mode == ToleranceMode::AbsoluteScaled) {
        const bool three_d = m.problem.kind == ProblemKind::Poisson3D;
        const double refinements = std::log2(static_cast<double>(m.problem.nx) / m.tolerance_base_n);
        k.abs_tol = m.tolerance_base * std::pow(three_d ? std::sqrt(8.0) : 2.0, refinements);
        k.rel_tol = 1e-300;
    }
    return k;
}

nlohmann::json hierarchy_summary_json(const std::vector<LevelStats>& levels, double oc, double gc) {
    nlohmann::json lv = nlohmann::json::array();
    for (const auto& s : levels)
        lv.push_back({{"n", s.n},
                      {"nnz", s.nnz},
                      {"relax_weight", s.relax_weight},
                      {"singular_blocks", s.singular_blocks},
                      {"skipped_constraint_rows", s.skipped_constraint_rows}});
    return {{"levels", lv}, {"operator_complexity", oc}, {"grid_complexity", gc}};
}

nlohmann::json splitting_json(const CfSplitting& s) {
    std::vector<int> labels(s.labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = s.labels[i] == PointType::C ? 1 : 0;
    nlohmann::json j = {{"labels", labels}, {"c_count", s.c_count}, {"f_count", s.f_count}};
    if (s.aggregate_of) j["aggregate_of"] = *s.aggregate_of;
    return j;
}

void export_transfer(const std::string& prefix, const SparseMatrixd& M, const CfSplitting& splitting,
                     const std::string& config_hash) {
    write_matrix_market(prefix + ".mtx", M);
    std::ofstream os(prefix + ".json");
    if (!os) throw std::runtime_error("cannot write '" + prefix + ".json'");
    os << nlohmann::json({{"splitting", splitting_json(splitting)}, {"config_hash", config_hash}}).dump(2) << '\n';
}

BenchmarkResult run_benchmark(const RunManifest& m) {
    BenchmarkResult res;
    res.manifest_hash = manifest_hash(m);
    SparseMatrixd A = generate(m.problem);
    if (m.solver.prescale_block > 0) A = block_diag_prescale(A, m.solver.prescale_block);

    const auto t0 = std::chrono::steady_clock::now();
    const Hierarchy<double> H = setup(A, m.solver);
    const double setup_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    res.operator_complexity = operator_complexity(H);
    res.grid_complexity = grid_complexity(H);
    res.levels = level_stats(H);

    const Vectord b = Vectord::Zero(A.rows());
    Vectord x = random_initial_guess(static_cast<int>(A.rows()), m.seed);
    res.report = krylov_solve(A, b, x, as_preconditioner(H), effective_krylov(m));
    finalize_report(res.report, res.operator_complexity);
    res.report.setup_seconds = setup_s;
    res.dnc = !res.report.converged;

    if (!m.output_dir.empty()) {
        std::filesystem::create_directories(m.output_dir);
        const std::filesystem::path dir(m.output_dir);
        std::ofstream(dir / "report.json") << result_json(m, res).dump(2) << '\n';
        std::ofstream hist(dir / "history.csv");
        hist << "iteration,residual\n" << std::setprecision(17);
        for (std::size_t i = 0; i < res.report.residual_history.size(); ++i)
            hist << i << ',' << res.report.residual_history[i] << '\n';
        std::ofstream(dir / "manifest.json") << manifest_to_string(m) << '\n';
        for (std::size_t k = 0; k < H.levels.size(); ++k) {
            const auto& L = H.levels[k];
            const std::string tag = (dir / ("level" + std::to_string(k))).string();
            export_transfer(tag + "_P", L.P.matrix, L.splitting, res.manifest_hash);
            export_transfer(tag + "_R", L.R.matrix, L.splitting, res.manifest_hash);
        }
    }
    return res;
}

nlohmann::json result_json(const RunManifest& m, const BenchmarkResult& r) {
    auto finite_or_null = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
    nlohmann::json j = {{"manifest_hash", r.manifest_hash},
                        {"label", m.label},
                        {"status", r.error.empty() ? (r.dnc ? "DNC" : "converged") : "error"},
                        {"iterations", r.report.iterations},
                        {"gamma", finite_or_null(r.report.gamma)},
                        {"operator_complexity", r.operator_complexity},
                        {"work_per_digit", finite_or_null(r.report.work_per_digit)},
                        {"setup_seconds", r.report.setup_seconds},
                        {"solve_seconds", r.report.solve_seconds},
                        {"residual_history", r.report.residual_history},
                        {"hierarchy", hierarchy_summary_json(r.levels, r.operator_complexity, r.grid_complexity)}};
    if (!r.error.empty()) j["error"] = r.error;
    return j;
}

void to_json(nlohmann::json& j, const SweepSpec& s) {
    j = {{"base", s.base}, {"axis", s.axis}, {"values", s.values}, {"solvers", s.solvers}};
}

void from_json(const nlohmann::json& j, SweepSpec& s) {
    get_opt(j, "base", s.base);
    get_opt(j, "axis", s.axis);
    get_opt(j, "values", s.values);
    get_opt(j, "solvers", s.solvers);
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
    if (spec.values.empty()) throw std::invalid_argument("run_sweep: empty axis");
    std::vector<std::string> solvers = spec.solvers;
    if (solvers.empty()) solvers.push_back("base");
    std::vector<SweepRow> rows;
    for (const auto& value : spec.values) {
        for (const auto& name : solvers) {
            nlohmann::json j = spec.base;
            if (spec.axis == "n") {
                j["problem"]["nx"] = value;
                j["problem"]["ny"] = value;
                j["problem"]["nz"] = value;
            } else {
                j[nlohmann::json::json_pointer(spec.axis)] = value;
            }
            SweepRow row;
            row.axis_value = value.dump();
            row.solver = name;
            try {
                RunManifest m = j.get<RunManifest>();
                if (name != "base") m.solver = solver_preset(name);
                if (!m.output_dir.empty())
                    m.output_dir = (std::filesystem::path(m.output_dir) / (name + "_" + row.axis_value)).string();
                row.manifest_hash = manifest_hash(m);
                row.result = run_benchmark(m);
            } catch (const std::exception& e) {
                row.result.error = e.what();
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
    os << "axis_value,solver,status,iterations,gamma,operator_complexity,work_per_digit,manifest_hash\n";
    os << std::setprecision(10);
    for (const auto& r : rows) {
        const auto& res = r.result;
        const char* status = !res.error.empty() ? "error" : (res.dnc ? "DNC" : "converged");
        os << r.axis_value << ',' << r.solver << ',' << status << ',' << res.report.iterations << ','
           << res.report.gamma << ',' << res.operator_complexity << ',' << res.report.work_per_digit << ','
           << r.manifest_hash << '\n';
    }
}

} // namespace clair
