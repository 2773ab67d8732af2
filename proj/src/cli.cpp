#include "qvar/cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "qvar/config.hpp"
#include "qvar/error.hpp"
#include "qvar/problems.hpp"
#include "qvar/studies.hpp"

namespace qvar {

namespace {

struct Context {
    ExperimentConfig config;
    std::filesystem::path out_dir;
    std::ostream& out;
};

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream file(path, std::ios::binary);
    if (!file) throw ConfigError(0, "out", "cannot write '" + path.string() + "'");
    file << content;
}

StudyOptions study_options(const ExperimentConfig& config) {
    StudyOptions opts;
    opts.outer = config.solver.outer;
    opts.inner = config.solver.inner;
    opts.jobs = config.jobs;
    opts.seed = config.seed;
    return opts;
}

QVIProblem regularized_problem(const QVIProblem& problem, double eps) {
    return problem.with_operator(add_regularization(problem.op, eps));
}

ContractionCertificate certificate_for(const ExperimentConfig& config, const QVIProblem& problem,
                                       OperatorConstants* constants_out = nullptr) {
    const OperatorConstants constants =
        estimate_constants(*problem.op, config.solver.norm, config.solver.trials, config.seed);
    if (constants_out != nullptr) *constants_out = constants;
    return contraction_certificate(constants, lipschitz_bound(problem.obstacle, Norm::l2));
}

int finish_study(Context& ctx, const StudyResult& result) {
    write_file(ctx.out_dir / (result.name + ".csv"), result.to_csv());
    ctx.out << "study " << result.name << ": " << result.rows.size() << " rows";
    if (result.fit) {
        ctx.out << ", slope " << format_real(result.fit->slope) << ", r2 " << format_real(result.fit->r2);
    } else {
        ctx.out << ", no fit";
    }
    ctx.out << ", exact hits " << result.exact_hits << '\n';
    for (const auto& [name, ok] : result.verdicts) ctx.out << "verdict " << name << '=' << (ok ? "true" : "false") << '\n';
    if (!result.all_converged()) return kExitNonConvergence;
    return result.all_verdicts() ? kExitOk : kExitVerdict;
}

int cmd_solve(Context& ctx) {
    const auto& cfg = ctx.config;
    const QVIProblem problem = regularized_problem(build_problem(cfg.problem).problem, cfg.solver.eps);
    QVIReport report = [&] {
        if (cfg.solver.mode == "minimal") return solve_qvi_minimal(problem, cfg.solver.outer, cfg.solver.inner);
        if (cfg.solver.mode == "maximal") return solve_qvi_maximal(problem, cfg.solver.outer, cfg.solver.inner);
        return solve_qvi_fixed_point(problem, GridFunction(problem.f.mesh()), cfg.solver.outer, cfg.solver.inner);
    }();
    write_file(ctx.out_dir / "solution.csv", to_csv(report.solution));
    std::ostringstream rep;
    report.write_csv(rep);
    write_file(ctx.out_dir / "report.csv", rep.str());
    const auto vals = report.solution.values();
    const auto [lo, hi] = std::minmax_element(vals.begin(), vals.end());
    ctx.out << "solve " << cfg.problem.name << " mode=" << cfg.solver.mode << " eps=" << format_real(cfg.solver.eps)
            << '\n'
            << "outer_iterations=" << report.outer_iterations << " converged=" << (report.converged ? "true" : "false")
            << " rho_observed=" << format_real(report.rho_observed) << '\n'
            << "min=" << format_real(*lo) << " max=" << format_real(*hi) << '\n';
    return report.converged ? kExitOk : kExitNonConvergence;
}

int cmd_trace(Context& ctx) {
    const auto& cfg = ctx.config;
    const QVIProblem problem = regularized_problem(build_problem(cfg.problem).problem, cfg.solver.eps);
    const QVIReport report =
        solve_qvi_fixed_point(problem, GridFunction(problem.f.mesh()), cfg.solver.outer, cfg.solver.inner);
    std::ostringstream rep;
    report.write_csv(rep);
    write_file(ctx.out_dir / "trace.csv", rep.str());
    const ContractionCertificate cert = certificate_for(cfg, problem);
    ctx.out << "trace " << cfg.problem.name << ": outer_iterations=" << report.outer_iterations
            << " converged=" << (report.converged ? "true" : "false") << '\n'
            << "rho_observed=" << format_real(report.rho_observed) << '\n'
            << "rho_certificate=" << format_real(cert.rho) << " smallness_ok=" << (cert.smallness_ok ? "true" : "false")
            << '\n';
    if (!report.converged) return kExitNonConvergence;
    if (cert.smallness_ok) {
        const bool bound = report.rho_observed <= cert.rho + 0.05;
        ctx.out << "verdict contraction_bound=" << (bound ? "true" : "false") << '\n';
        if (!bound) return kExitVerdict;
    }
    return kExitOk;
}

int cmd_certify(Context& ctx) {
    const auto& cfg = ctx.config;
    const QVIProblem problem = regularized_problem(build_problem(cfg.problem).problem, cfg.solver.eps);
    OperatorConstants constants;
    const ContractionCertificate cert = certificate_for(cfg, problem, &constants);
    std::ostringstream csv;
    csv << "c,L,gamma,norm_tag,method\n" << constants.csv_row() << '\n';
    write_file(ctx.out_dir / "constants.csv", csv.str());
    ctx.out << csv.str() << "L_A=" << format_real(cert.L_A) << " L_N=" << format_real(cert.L_N)
            << " L_phi=" << format_real(cert.L_phi) << '\n'
            << "rho=" << format_real(cert.rho) << '\n'
            << "smallness_ok=" << (cert.smallness_ok ? "true" : "false") << '\n';
    return cert.smallness_ok ? kExitOk : kExitVerdict;
}

int cmd_regpath(Context& ctx) {
    const auto& cfg = ctx.config;
    const BuiltProblem built = build_problem(cfg.problem);
    std::vector<double> eps_list = cfg.study.eps_list;
    if (eps_list.empty()) eps_list = {0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625};
    RegularizationReference reference;
    reference.eps = cfg.study.eps_ref;
    const std::string kind = cfg.study.reference.value_or(built.exact_limit ? "exact" : "eps");
    if (kind == "exact") {
        if (!built.exact_limit) throw ConfigError(0, "reference", "no exact solution known for this problem");
        reference.exact = built.exact_limit;
    }
    return finish_study(ctx, run_regularization_path(built.problem, eps_list, reference, study_options(cfg)));
}

int cmd_perturb(Context& ctx) {
    const auto& cfg = ctx.config;
    const BuiltProblem built = build_problem(cfg.problem);
    std::vector<double> deltas = cfg.study.delta_list;
    if (deltas.empty()) deltas = {0.4, 0.2, 0.1, 0.05, 0.025};
    return finish_study(ctx, run_operator_perturbation(built.problem, parse_perturbation_family(cfg.study.family),
                                                       deltas, study_options(cfg)));
}

int cmd_refine(Context& ctx) {
    const auto& cfg = ctx.config;
    std::vector<int> n_list = cfg.study.n_list;
    if (n_list.empty()) n_list = {8, 16, 32, 64, 128, 256};
    return finish_study(ctx, run_mesh_refinement(problem_template(cfg.problem), n_list, study_options(cfg)));
}

int cmd_robust(Context& ctx) {
    const auto& cfg = ctx.config;
    const BuiltProblem built = build_problem(cfg.problem);
    std::vector<double> f_deltas = cfg.study.f_deltas;
    if (f_deltas.empty() && cfg.study.phi_deltas.empty()) f_deltas = {0.2, 0.1, 0.05, 0.025};
    const double eps = cfg.study.eps.value_or(cfg.solver.eps);
    return finish_study(ctx, run_data_robustness(built.problem, f_deltas, cfg.study.phi_deltas, eps,
                                                 study_options(cfg)));
}

int cmd_oracle_check(std::ostream& out, int trials, int ndof, std::uint64_t seed) {
    if (trials < 1 || ndof < 1 || ndof > 20) throw ConfigError(0, "oracle-check", "need trials >= 1 and 1 <= ndof <= 20");
    std::mt19937_64 rng(seed);
    VIParams params;
    params.tol = 1e-10;
    params.max_iter = 100000;
    double max_dev = 0.0, max_kkt = 0.0;
    bool all_converged = true;
    for (int t = 0; t < trials; ++t) {
        const ObstacleInstance inst = random_obstacle_instance(rng, ndof);
        const VISolveReport psor = solve_vi_psor(inst.op, inst.f, inst.psi, params);
        all_converged = all_converged && psor.converged;
        const GridFunction oracle = solve_vi_active_set_oracle(inst.op, inst.f, inst.psi);
        max_dev = std::max(max_dev, norm(psor.solution - oracle, Norm::sup));
        max_kkt = std::max(max_kkt, psor.kkt_residual);
    }
    const bool ok = max_dev <= 1e-8 && max_kkt <= 1e-9;
    out << "oracle-check trials=" << trials << " ndof<=" << ndof << " seed=" << seed << '\n'
        << "max_deviation=" << format_real(max_dev) << '\n'
        << "max_kkt_residual=" << format_real(max_kkt) << '\n'
        << "verdict oracle_equivalence=" << (ok ? "true" : "false") << '\n';
    if (!all_converged) return kExitNonConvergence;
    return ok ? kExitOk : kExitVerdict;
}

std::optional<std::uint64_t> env_seed() {
    const char* raw = std::getenv("QVAR_SEED");
    if (raw == nullptr || *raw == '\0') return std::nullopt;
    try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(raw, &used);
        if (used != std::strlen(raw)) throw std::invalid_argument(raw);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(0, "QVAR_SEED", std::string("malformed seed '") + raw + "'");
    }
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Quasi-variational inequality laboratory", "qvar"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_override;
    int jobs = 0;
    int trials = 100;
    int ndof = 8;
    std::uint64_t seed = 42;

    const char* study_commands[][2] = {
        {"solve", "Solve one QVI and write solution.csv and report.csv"},
        {"regpath", "Regularization path eps -> 0"},
        {"perturb", "Operator perturbation study"},
        {"refine", "Mesh self-convergence study"},
        {"robust", "Data perturbation study"},
        {"trace", "Fixed-point iteration trace with observed contraction"},
        {"certify", "Contraction certificate from estimated constants"},
    };
    for (const auto& [name, help] : study_commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("-c,--config", config_path, "Experiment configuration")->required();
        sub->add_option("-o,--out", out_override, "Output directory (overrides the config)");
        sub->add_option("-j,--jobs", jobs, "Concurrent parameter points")->check(CLI::Range(1, 1024));
    }
    CLI::App* oracle = app.add_subcommand("oracle-check", "PSOR against active-set enumeration");
    oracle->add_option("--trials", trials, "Random instances")->check(CLI::Range(1, 1000000));
    oracle->add_option("--ndof", ndof, "Largest number of unknowns")->check(CLI::Range(1, 20));
    oracle->add_option("--seed", seed, "Random seed");

    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "qvar: " << e.what() << '\n';
        return kExitConfig;
    }

    try {
        if (oracle->parsed()) return cmd_oracle_check(out, trials, ndof, seed);

        ExperimentConfig config = load_config(config_path);
        if (const auto s = env_seed()) config.seed = *s;
        if (!out_override.empty()) config.out = out_override;
        if (jobs > 0) config.jobs = jobs;
        Context ctx{config, config.out, out};
        std::filesystem::create_directories(ctx.out_dir);

        const std::string name = app.get_subcommands().front()->get_name();
        if (name == "solve") return cmd_solve(ctx);
        if (name == "trace") return cmd_trace(ctx);
        if (name == "certify") return cmd_certify(ctx);
        if (name == "regpath") return cmd_regpath(ctx);
        if (name == "perturb") return cmd_perturb(ctx);
        if (name == "refine") return cmd_refine(ctx);
        if (name == "robust") return cmd_robust(ctx);
        return kExitInternal;
    } catch (const ConfigError& e) {
        err << "qvar: config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const SolverError& e) {
        err << "qvar: solver failure: " << e.what() << '\n';
        return kExitNonConvergence;
    } catch (const OrderingViolationError& e) {
        err << "qvar: ordering violation: " << e.what() << '\n';
        return kExitVerdict;
    } catch (const Error& e) {
        err << "qvar: invalid setup: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "qvar: " << e.what() << '\n';
        return kExitInternal;
    }
}

}  // namespace qvar
