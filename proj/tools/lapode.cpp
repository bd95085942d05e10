// Command-line front end: run, convergence, invariants, list, validate.
//
// Exit codes: 0 ok, 1 usage, 2 structure/schema, 3 solver failure or
// divergence, 4 I/O.

#include "lapode/harness.hpp"
#include "lapode/loader.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

using namespace lapode;

namespace {

enum Exit { kOk = 0, kUsage = 1, kStructure = 2, kSolve = 3, kIo = 4 };

int exit_code(ErrorKind k) {
    switch (k) {
        case ErrorKind::Usage:
        case ErrorKind::Domain:
            return kUsage;
        case ErrorKind::Structure:
        case ErrorKind::Schema:
        case ErrorKind::Dimension:
            return kStructure;
        case ErrorKind::Solve:
        case ErrorKind::StabilityRegion:
            return kSolve;
        case ErrorKind::Io:
            return kIo;
    }
    return kUsage;
}

/// Errors raised while stepping are solver failures unless they concern
/// structure or files.
int solve_exit_code(ErrorKind k) {
    if (k == ErrorKind::Structure || k == ErrorKind::Io) {
        return exit_code(k);
    }
    return kSolve;
}

struct ProblemArgs {
    std::string model;
    std::string file;
    bool allow_nonlaplacian = false;
    std::optional<double> tf;
};

struct StepArgs {
    std::string method = "em2-mid";
    std::string mode = "accurate";
    double h = 0.0;
    bool strict_positivity = false;
    long thin = 1;
};

struct Options {
    ProblemArgs problem;
    StepArgs step;
    std::string out_dir = "out";
    // convergence
    std::vector<std::string> methods;
    std::optional<double> h0;
    std::optional<int> levels;
    std::vector<int> components;
    std::string reference_method = "em3";
    std::optional<double> reference_h;
    bool absolute = false;
    bool no_structure_check = false;
    // validate
    std::string validate_path;
    std::uint64_t seed = 1;
    int samples = 200;
};

void add_problem_flags(CLI::App* cmd, ProblemArgs& p) {
    auto* model = cmd->add_option("--model", p.model, "Built-in model id (see `list`)");
    auto* file = cmd->add_option("--problem-file", p.file, "JSON problem file");
    model->excludes(file);
    cmd->add_flag("--allow-nonlaplacian", p.allow_nonlaplacian, "Accept matrices without the Laplacian sign pattern");
    cmd->add_option("--tf", p.tf, "Override the final time");
}

void add_step_flags(CLI::App* cmd, StepArgs& s, bool need_h) {
    cmd->add_option("--mode", s.mode, "Exponential evaluation: accurate | pade2")->capture_default_str();
    cmd->add_flag("--strict-positivity", s.strict_positivity, "Abort when an EM3 combination loses the sign pattern");
    if (need_h) {
        cmd->add_option("--method", s.method, "Integrator")->capture_default_str();
        cmd->add_option("--h", s.h, "Step size")->required();
        cmd->add_option("--thin", s.thin, "Keep every n-th step in the trajectory")->capture_default_str();
    }
}

ModelEntry resolve_model(const ProblemArgs& a) {
    if (a.model.empty() == a.file.empty()) {
        fail(ErrorKind::Usage, "give exactly one of --model or --problem-file");
    }
    ModelEntry m = a.file.empty() ? find_model(a.model, a.allow_nonlaplacian)
                                  : load_problem(a.file, a.allow_nonlaplacian).entry;
    if (a.tf) {
        if (!(*a.tf >= m.problem.t0) || !std::isfinite(*a.tf)) {
            fail(ErrorKind::Usage, "--tf must be finite and not before t0");
        }
        m.problem.tf = *a.tf;
    }
    return m;
}

std::string out_dir(const Options& o) {
    if (const char* env = std::getenv("LAPLACE_ODE_OUT"); env != nullptr && *env != '\0') {
        return env;
    }
    return o.out_dir;
}

std::filesystem::path prepare_dir(const Options& o) {
    const std::filesystem::path dir = out_dir(o);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        fail(ErrorKind::Io, "cannot create output directory '" + dir.string() + "': " + ec.message());
    }
    return dir;
}

void write_file(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body) {
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        fail(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
    }
    body(os);
    os.flush();
    if (!os) {
        fail(ErrorKind::Io, "write to '" + path.string() + "' failed");
    }
}

void require_positive_h(double h, const char* flag) {
    if (!(h > 0.0) || !std::isfinite(h)) {
        fail(ErrorKind::Usage, std::string(flag) + " must be positive and finite");
    }
}

IntegrateOptions integrate_options(const ProblemArgs& p, const StepArgs& s, ExpMode mode, bool keep) {
    IntegrateOptions o;
    o.step.mode = mode;
    o.step.check_structure = !p.allow_nonlaplacian;
    o.step.strict_positivity = s.strict_positivity;
    o.thin = s.thin;
    o.keep_samples = keep;
    return o;
}

int cmd_list() {
    std::cout << std::left << std::setw(18) << "id" << std::setw(5) << "dim" << std::setw(12) << "autonomous"
              << std::setw(8) << "strict"
              << "description\n";
    for (const auto& id : model_ids(true)) {
        const auto m = find_model(id, true);
        std::cout << std::setw(18) << m.id << std::setw(5) << m.problem.dim << std::setw(12)
                  << (m.problem.autonomous ? "yes" : "no") << std::setw(8) << (m.problem.strict ? "yes" : "no")
                  << m.description << (m.requires_opt_in ? " [needs --allow-nonlaplacian]" : "") << "\n";
    }
    return kOk;
}

int cmd_run(const Options& o) {
    const ModelEntry m = resolve_model(o.problem);
    const MethodId method = parse_method(o.step.method);
    const ExpMode mode = parse_exp_mode(o.step.mode);
    require_positive_h(o.step.h, "--h");
    if (o.step.thin < 1) {
        fail(ErrorKind::Usage, "--thin must be >= 1");
    }
    const auto dir = prepare_dir(o);
    TrajectoryD traj;
    try {
        traj = integrate(m.problem, method, o.step.h, integrate_options(o.problem, o.step, mode, true));
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return solve_exit_code(e.kind());
    }
    const RunReport report = make_report(m, method, mode, o.step.h, traj);
    const std::string stem = m.id + "_" + to_string(method);
    write_file(dir / (stem + "_trajectory.csv"), [&](std::ostream& os) { write_trajectory_csv(os, m.problem, traj); });
    write_file(dir / (stem + "_report.json"), [&](std::ostream& os) { os << report_json(report) << "\n"; });
    std::cout << report_json(report) << "\n";
    if (traj.summary.diverged) {
        std::cerr << "error: solution diverged at step " << *traj.summary.diverged_step << "\n";
        return kSolve;
    }
    return kOk;
}

int cmd_convergence(const Options& o) {
    const ModelEntry m = resolve_model(o.problem);
    ConvergenceSpec spec;
    if (o.methods.empty()) {
        fail(ErrorKind::Usage, "--methods is empty");
    }
    for (const auto& name : o.methods) {
        spec.methods.push_back(parse_method(name));
    }
    spec.h0 = o.h0.value_or(m.controls.h0);
    require_positive_h(spec.h0, "--h0");
    spec.levels = o.levels.value_or(m.controls.levels);
    if (spec.levels < 2) {
        fail(ErrorKind::Usage, "--levels must be at least 2 to fit an order");
    }
    if (o.components.empty()) {
        spec.components = m.controls.error_components;
    } else {
        for (int c : o.components) {
            if (c < 1 || c > m.problem.dim) {
                fail(ErrorKind::Usage, "--components entry " + std::to_string(c) + " outside 1.." +
                                           std::to_string(m.problem.dim));
            }
            spec.components.push_back(c - 1);
        }
    }
    spec.relative = !o.absolute;
    spec.mode = parse_exp_mode(o.step.mode);
    spec.reference_method = parse_method(o.reference_method);
    if (o.reference_h) {
        require_positive_h(*o.reference_h, "--reference-h");
    }
    spec.reference_h = o.reference_h;
    spec.check_structure = !o.no_structure_check && !o.problem.allow_nonlaplacian;
    spec.strict_positivity = o.step.strict_positivity;
    const auto dir = prepare_dir(o);

    std::vector<ConvergenceTable> tables;
    try {
        tables = run_convergence(m, spec);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return solve_exit_code(e.kind());
    }
    for (const auto& t : tables) {
        write_file(dir / (m.id + "_convergence_" + to_string(t.method) + ".csv"),
                   [&](std::ostream& os) { write_convergence_csv(os, t, m.problem); });
    }
    write_file(dir / (m.id + "_convergence.json"),
               [&](std::ostream& os) { os << convergence_json(tables, m.problem) << "\n"; });

    std::cout << "model " << m.id << ", mode " << to_string(spec.mode) << ", reference "
              << to_string(spec.reference_method) << " h=" << format_double(tables.front().reference_h)
              << " floor=" << format_double(tables.front().reference_floor) << "\n";
    for (const auto& t : tables) {
        std::cout << std::left << std::setw(16) << to_string(t.method) << "order "
                  << (t.fitted_order ? format_double(*t.fitted_order) : "n/a") << "\n";
        for (const auto& r : t.rows) {
            std::cout << "  h=" << std::setw(24) << format_double(r.h) << " error=" << std::setw(24)
                      << format_double(r.error) << " min=" << format_double(r.min_component)
                      << (r.used_in_fit ? "" : " (not fitted)") << (r.failure.empty() ? "" : " failed: " + r.failure)
                      << "\n";
        }
    }
    return kOk;
}

int cmd_invariants(const Options& o) {
    const ModelEntry m = resolve_model(o.problem);
    const MethodId method = parse_method(o.step.method);
    const ExpMode mode = parse_exp_mode(o.step.mode);
    require_positive_h(o.step.h, "--h");
    if (m.problem.conservation.empty()) {
        fail(ErrorKind::Usage, "model '" + m.id + "' declares no conservation vectors");
    }
    const auto dir = prepare_dir(o);
    TrajectoryD traj;
    try {
        traj = integrate(m.problem, method, o.step.h, integrate_options(o.problem, o.step, mode, true));
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return solve_exit_code(e.kind());
    }
    write_file(dir / (m.id + "_" + to_string(method) + "_invariants.csv"),
               [&](std::ostream& os) { write_invariants_csv(os, m.problem, traj); });
    const RunReport report = make_report(m, method, mode, o.step.h, traj);
    for (std::size_t k = 0; k < report.invariant_labels.size(); ++k) {
        std::cout << std::left << std::setw(14) << report.invariant_labels[k] << "max |drift| "
                  << format_double(traj.summary.max_abs_invariant_drift[k]) << "  relative "
                  << format_double(report.invariant_relative_drift[k]) << "\n";
    }
    return traj.summary.diverged ? kSolve : kOk;
}

int cmd_validate(const Options& o) {
    const std::string path = !o.validate_path.empty() ? o.validate_path : o.problem.file;
    if (path.empty()) {
        fail(ErrorKind::Usage, "validate needs a problem file");
    }
    if (o.samples < 1) {
        fail(ErrorKind::Usage, "--samples must be positive");
    }
    const LoadedProblem lp = load_problem(path, o.problem.allow_nonlaplacian);
    const auto& p = lp.entry.problem;
    const ProblemCheck c = check_problem(lp, o.samples, o.seed);
    std::cout << "problem " << lp.entry.id << " (" << lp.kind << ", dim " << p.dim << ", "
              << (p.autonomous ? "autonomous" : "time-dependent") << ", " << (p.strict ? "strict" : "non-strict")
              << ")\n";
    std::cout << "sign pattern: " << (c.sign_ok ? "ok" : "FAILED") << "\n";
    if (p.strict) {
        std::cout << "zero column sums: " << (c.strict_ok ? "ok" : "FAILED") << "\n";
    }
    if (c.representation) {
        std::cout << "right-hand side vs matrix form: max relative residual "
                  << format_double(c.representation->max_residual) << (c.representation_ok ? " ok" : " FAILED")
                  << "\n";
    }
    if (!c.ok()) {
        std::cerr << "error: " << c.first_failure << "\n";
        return kStructure;
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Positivity-preserving exponential integrators for graph-Laplacian ODEs"};
    app.require_subcommand(1);
    app.set_help_flag("--help", "Print this help message and exit");
    Options o;

    app.add_subcommand("list", "List built-in models");

    auto* run = app.add_subcommand("run", "Integrate one model with one method");
    add_problem_flags(run, o.problem);
    add_step_flags(run, o.step, true);
    run->add_option("--out-dir", o.out_dir, "Output directory (LAPLACE_ODE_OUT overrides)");

    auto* conv = app.add_subcommand("convergence", "Error-versus-step study with fitted orders");
    add_problem_flags(conv, o.problem);
    add_step_flags(conv, o.step, false);
    conv->add_option("--methods", o.methods, "Integrators (comma separated)")->delimiter(',')->required();
    conv->add_option("--h0", o.h0, "Coarsest step (default: model suggestion)");
    conv->add_option("--levels", o.levels, "Number of dyadic refinements h0 * 2^-j");
    conv->add_option("--components", o.components, "1-based error components (comma separated)")->delimiter(',');
    conv->add_option("--reference-method", o.reference_method, "Reference integrator")->capture_default_str();
    conv->add_option("--reference-h", o.reference_h, "Reference step (default: h_min / 64)");
    conv->add_flag("--absolute", o.absolute, "Absolute instead of relative 2-norm error");
    conv->add_flag("--no-structure-check", o.no_structure_check, "Skip the per-stage sign-pattern check");
    conv->add_option("--out-dir", o.out_dir, "Output directory (LAPLACE_ODE_OUT overrides)");

    auto* inv = app.add_subcommand("invariants", "Per-step drift of the declared conservation laws");
    add_problem_flags(inv, o.problem);
    add_step_flags(inv, o.step, true);
    inv->add_option("--out-dir", o.out_dir, "Output directory (LAPLACE_ODE_OUT overrides)");

    auto* val = app.add_subcommand("validate", "Check a JSON problem file");
    val->add_option("path", o.validate_path, "Problem file");
    val->add_option("--problem-file", o.problem.file, "Problem file");
    val->add_flag("--allow-nonlaplacian", o.problem.allow_nonlaplacian, "Skip the sign check at (t0, y0)");
    val->add_option("--seed", o.seed, "Sampling seed")->capture_default_str();
    val->add_option("--samples", o.samples, "Random states to check")->capture_default_str();

    for (auto* sub : app.get_subcommands({})) {
        sub->set_help_flag("--help", "Print this help message and exit");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (app.got_subcommand("list")) {
            return cmd_list();
        }
        if (app.got_subcommand(run)) {
            return cmd_run(o);
        }
        if (app.got_subcommand(conv)) {
            return cmd_convergence(o);
        }
        if (app.got_subcommand(inv)) {
            return cmd_invariants(o);
        }
        return cmd_validate(o);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kSolve;
    }
}
