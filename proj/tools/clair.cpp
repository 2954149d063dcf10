#include "clair/analysis.hpp"
#include "clair/benchmark.hpp"
#include "clair/matrix_market.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>

namespace {

struct ProblemArgs {
    std::string kind = "poisson2d";
    int n = 32;
    int ny = 0;
    int nz = 0;
    double alpha = 1.0;
    double epsilon = 1.0;
    double phi = 0.0;
    double d_high = 1e4;
    bool no_scale = false;

    void attach(CLI::App* app) {
        app->add_option("--problem,--kind", kind, "problem kind")->check(CLI::IsMember(
            {"identity", "poisson2d", "poisson3d", "aniso2d", "jump-box", "jump-sawtooth", "advdiff-constant",
             "advdiff-recirculating"}));
        app->add_option("-n,--n", n, "unknowns per axis")->check(CLI::PositiveNumber);
        app->add_option("--ny", ny, "unknowns in y (default n)");
        app->add_option("--nz", nz, "unknowns in z (default n)");
        app->add_option("--alpha", alpha, "diffusion constant");
        app->add_option("--epsilon", epsilon, "anisotropy strength");
        app->add_option("--phi", phi, "anisotropy angle in radians");
        app->add_option("--d-high", d_high, "jump coefficient inside the region");
        app->add_flag("--no-h-scaling", no_scale, "do not scale stencils by 1/h^2");
    }

    clair::ProblemSpec spec() const {
        clair::ProblemSpec p;
        p.kind = clair::problem_kind_from_string(kind);
        p.nx = n;
        p.ny = ny > 0 ? ny : n;
        p.nz = nz > 0 ? nz : n;
        p.alpha = alpha;
        p.epsilon = epsilon;
        p.phi = phi;
        p.d_high = d_high;
        p.scale_h = !no_scale;
        return p;
    }
};

struct SolverArgs {
    std::string preset = "clair";
    std::string krylov = "auto";
    double rel_tol = 1e-8;
    int max_iters = 100;
    int restart = 0;
    int prescale = -1;
    int degree = 0;
    int smoothing_steps = -1;
    std::string tolerance_mode = "relative";

    void attach(CLI::App* app) {
        app->add_option("--solver", preset, "solver preset")->check(CLI::IsMember(clair::solver_preset_names()));
        app->add_option("--krylov", krylov, "cg, gmres or auto")->check(CLI::IsMember({"auto", "cg", "gmres"}));
        app->add_option("--rtol", rel_tol, "relative residual tolerance");
        app->add_option("--max-iters", max_iters, "Krylov iteration cap");
        app->add_option("--restart", restart, "GMRES restart (0 = none)");
        app->add_option("--prescale", prescale, "block size for diagonal-block prescaling (0 = off)");
        app->add_option("--degree", degree, "sparsity degree override");
        app->add_option("--constraint-steps", smoothing_steps, "constraint smoothing sweeps");
        app->add_option("--tolerance-mode", tolerance_mode, "relative or absolute-scaled")
            ->check(CLI::IsMember({"relative", "absolute-scaled"}));
    }

    void apply(clair::RunManifest& m) const {
        m.solver = clair::solver_preset(preset);
        if (prescale >= 0) m.solver.prescale_block = prescale;
        if (degree > 0) {
            m.solver.transfer.sparsity_degree = degree;
            m.solver.restriction_degree = degree;
        }
        if (smoothing_steps >= 0) m.solver.transfer.constraint_smoothing_steps = smoothing_steps;
        const bool symmetric = m.solver.method != clair::Method::lAIR &&
                               (m.solver.method != clair::Method::CLAIR ||
                                m.solver.transfer.build_R_from == clair::RestrictionSource::PTranspose);
        if (krylov == "auto") m.krylov.method = symmetric ? clair::KrylovMethod::CG : clair::KrylovMethod::GMRES;
        else m.krylov.method = krylov == "cg" ? clair::KrylovMethod::CG : clair::KrylovMethod::GMRES;
        m.krylov.rel_tol = rel_tol;
        m.krylov.max_iters = max_iters;
        m.krylov.restart = restart;
        m.tolerance_mode =
            tolerance_mode == "relative" ? clair::ToleranceMode::Relative : clair::ToleranceMode::AbsoluteScaled;
    }
};

void apply_thread_cap() {
    if (const char* env = std::getenv("CLAIR_NUM_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) Eigen::setNbThreads(n);
    }
}

void print_summary(const clair::RunManifest& m, const clair::BenchmarkResult& r) {
    nlohmann::json j = clair::result_json(m, r);
    j.erase("residual_history");
    std::cout << j.dump(2) << '\n';
}

} // namespace

int main(int argc, char** argv) {
    apply_thread_cap();
    CLI::App app{"Reduction-based algebraic multigrid benchmark driver"};
    app.require_subcommand(1);

    // solve
    auto* solve = app.add_subcommand("solve", "set up a hierarchy and run one accelerated solve");
    ProblemArgs solve_problem;
    SolverArgs solve_solver;
    std::string manifest_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    solve_problem.attach(solve);
    solve_solver.attach(solve);
    solve->add_option("--manifest", manifest_path, "run manifest JSON (overrides other flags)");
    solve->add_option("--out", out_dir, "directory for report.json, history.csv and transfer exports");
    solve->add_option("--seed", seed, "seed of the random initial guess");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "run a parameter sweep described by a JSON file");
    std::string sweep_path;
    std::string sweep_csv;
    sweep->add_option("spec", sweep_path, "sweep JSON: {base, axis, values, solvers}")->required();
    sweep->add_option("--csv", sweep_csv, "write the table here instead of stdout");

    // problems emit
    auto* problems = app.add_subcommand("problems", "test-matrix generators");
    problems->require_subcommand(1);
    auto* emit = problems->add_subcommand("emit", "write a generated matrix as Matrix Market plus JSON metadata");
    ProblemArgs emit_problem;
    std::string emit_prefix = "matrix";
    emit_problem.attach(emit);
    emit->add_option("-o,--out", emit_prefix, "output prefix");

    // analyze-fap
    auto* fap = app.add_subcommand("analyze-fap", "approximation-property constants of the finest-level transfers");
    ProblemArgs fap_problem;
    SolverArgs fap_solver;
    std::string fap_side = "left";
    std::string fap_csv;
    std::string fap_json;
    fap_problem.attach(fap);
    fap_solver.attach(fap);
    fap->add_option("--side", fap_side, "left (R^T against AQ) or right (P against QA)")
        ->check(CLI::IsMember({"left", "right"}));
    fap->add_option("--csv", fap_csv, "per-vector constants CSV");
    fap->add_option("--json", fap_json, "K_max summary JSON");

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) {
            clair::RunManifest m;
            if (!manifest_path.empty()) {
                m = clair::load_manifest(manifest_path);
            } else {
                m.problem = solve_problem.spec();
                solve_solver.apply(m);
                m.seed = seed;
            }
            if (!out_dir.empty()) m.output_dir = out_dir;
            const clair::BenchmarkResult r = clair::run_benchmark(m);
            print_summary(m, r);
            return r.dnc ? 2 : 0;
        }
        if (sweep->parsed()) {
            std::ifstream is(sweep_path);
            if (!is) throw std::runtime_error("cannot open '" + sweep_path + "'");
            const clair::SweepSpec spec = nlohmann::json::parse(is).get<clair::SweepSpec>();
            const auto rows = clair::run_sweep(spec);
            if (sweep_csv.empty()) {
                clair::write_sweep_csv(std::cout, rows);
            } else {
                std::ofstream os(sweep_csv);
                clair::write_sweep_csv(os, rows);
            }
            return 0;
        }
        if (emit->parsed()) {
            const clair::ProblemSpec p = emit_problem.spec();
            const clair::SparseMatrixd A = clair::generate(p);
            clair::write_matrix_market(emit_prefix + ".mtx", A);
            std::ofstream meta(emit_prefix + ".json");
            meta << nlohmann::json({{"problem", p}, {"h", clair::grid_spacing(p)}, {"n", A.rows()}, {"nnz", A.nonZeros()}})
                        .dump(2)
                 << '\n';
            std::cout << emit_prefix << ".mtx: " << A.rows() << " x " << A.cols() << ", nnz " << A.nonZeros() << '\n';
            return 0;
        }
        if (fap->parsed()) {
            clair::RunManifest m;
            m.problem = fap_problem.spec();
            fap_solver.apply(m);
            clair::SparseMatrixd A = clair::generate(m.problem);
            if (m.solver.prescale_block > 0) A = clair::block_diag_prescale(A, m.solver.prescale_block);
            clair::SolverConfig<double> cfg = m.solver;
            cfg.max_levels = 2;
            const auto H = clair::setup(A, cfg);
            if (H.levels.empty()) throw std::runtime_error("analyze-fap: problem too small to coarsen");
            const auto side = fap_side == "left" ? clair::AnalysisSide::Left : clair::AnalysisSide::Right;
            const auto& T = side == clair::AnalysisSide::Left ? H.levels[0].R.matrix : H.levels[0].P.matrix;
            const auto results = clair::approximation_report(A, T, side);
            if (!fap_csv.empty()) {
                std::ofstream os(fap_csv);
                clair::write_report_csv(os, results);
            }
            const std::string summary = clair::report_summary_json(results);
            if (!fap_json.empty()) std::ofstream(fap_json) << summary << '\n';
            std::cout << summary << '\n';
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
