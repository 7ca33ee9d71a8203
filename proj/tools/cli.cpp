#include "cli.hpp"

#include "betalap/errors.hpp"
#include "betalap/evolution.hpp"
#include "betalap/io.hpp"
#include "betalap/operator.hpp"
#include "betalap/spectrum.hpp"
#include "betalap/tree.hpp"
#include "betalap/verify.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace betalap::cli {

namespace {

// Usage error tied to a flag; reported as "<flag>: <message>".
class FlagError : public std::runtime_error {
public:
    FlagError(const std::string& flag, const std::string& message) : std::runtime_error(flag + ": " + message) {}
};

class VerificationFailed : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void emit(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
    } else {
        io::write_atomic(path, content);
    }
}

BetaWeight checked_beta(double beta, const std::string& flag = "--beta") {
    if (!(beta >= 0.0 && beta < 1.0)) {
        throw FlagError(flag, "beta must lie in [0, 1), got " + io::format_number(beta));
    }
    return make_beta(beta);
}

void require_subcritical(double beta, const std::string& flag = "--beta") {
    if (beta >= 0.5 && beta < 1.0) {
        throw FlagError(flag, "beta = " + io::format_number(beta) +
                                  " is outside (0, 1/2), where the principal eigenvalue exists; "
                                  "use diagnose-supercritical for beta in [1/2, 1)");
    }
    if (!(beta > 0.0 && beta < 0.5)) {
        throw FlagError(flag, "beta = " + io::format_number(beta) +
                                  " is outside (0, 1/2); at beta = 0 every lambda in (0, 1] is principal");
    }
}

void require_admissible_depth(const BetaWeight& bw, std::size_t depth, const std::string& flag = "--depth") {
    const std::size_t max_depth = max_admissible_depth(bw);
    if (depth > max_depth) {
        throw FlagError(flag, "depth " + std::to_string(depth) + " is not admissible for beta = " +
                                  io::format_number(bw.beta) + " (p^{-L} overflows beyond L = " +
                                  std::to_string(max_depth) + ")");
    }
}

void require_positive(double x, const std::string& flag) {
    if (!(x > 0.0) || !std::isfinite(x)) throw FlagError(flag, "must be positive, got " + io::format_number(x));
}

// Truncated principal eigenpair for any admissible beta.
struct Eigenpair {
    double lambda;
    LevelFunction u;
};

Eigenpair reference_eigenpair(const BetaWeight& bw, std::size_t depth) {
    if (bw.beta > 0.0 && bw.beta < 0.5 && depth >= 2) {
        EigenResult r = principal_eigenvalue(bw, depth);
        return {r.lambda1, r.eigenfunction};
    }
    const double lambda = truncated_eigenvalue(bw, depth, kDefaultEigenTol);
    return {lambda, chain_eigenfunction(bw, lambda, depth)};
}

TreeFunction initial_datum(const std::string& selector, const BetaWeight& bw, const TruncatedTree& tree) {
    if (selector == "eigen") {
        return embed(tree, reference_eigenpair(bw, tree.depth()).u);
    }
    if (selector == "root-indicator") {
        TreeFunction f(tree);
        f[0] = 1.0;
        return f;
    }
    if (selector.rfind("constant:", 0) == 0) {
        double c = 0.0;
        try {
            c = io::parse_number(selector.substr(9));
        } catch (const ParseError&) {
            throw FlagError("--initial", "bad constant in \"" + selector + "\"");
        }
        return TreeFunction(tree, std::vector<double>(tree.node_count(), c));
    }
    if (selector.rfind("file:", 0) == 0) {
        const std::string path = selector.substr(5);
        try {
            return io::parse_tree_function_csv(io::read_file(path), tree);
        } catch (const std::exception& e) {
            throw FlagError("--initial", "cannot load " + path + ": " + e.what());
        }
    }
    throw FlagError("--initial", "expected eigen | root-indicator | constant:<c> | file:<path>, got \"" + selector +
                                     "\"");
}

Scheme parse_scheme(const std::string& name) {
    if (name == "implicit") return Scheme::implicit;
    if (name == "picard") return Scheme::picard;
    throw FlagError("--scheme", "expected implicit or picard, got \"" + name + "\"");
}

// ---------------------------------------------------------------- eigen

struct EigenArgs {
    double beta = 0.0;
    std::optional<std::size_t> depth;
    double tol = kDefaultEigenTol;
    std::optional<std::uint32_t> branching;
    std::string out;
    std::string eigenfunction_out;
    std::string convergence_out;
};

void run_eigen(const EigenArgs& a) {
    require_subcritical(a.beta);
    const BetaWeight bw = checked_beta(a.beta);
    require_positive(a.tol, "--tol");
    if (a.branching && *a.branching < 2) throw FlagError("--m", "branching factor must be at least 2");
    const std::size_t depth = a.depth.value_or(default_depth(bw));
    require_admissible_depth(bw, depth);
    if (depth < 2) throw FlagError("--depth", "must be at least 2");

    const EigenResult r = principal_eigenvalue(bw, depth, a.tol);
    emit(a.out, io::eigen_result_json(r, a.branching));
    if (!a.eigenfunction_out.empty()) io::write_atomic(a.eigenfunction_out, io::level_function_csv(r.eigenfunction));
    if (!a.convergence_out.empty()) {
        std::vector<std::size_t> depths;
        for (std::size_t d = 25; d < depth; d *= 2) depths.push_back(d);
        depths.push_back(depth);
        std::string csv = "depth,lambda1\n";
        for (const DepthEigenvalue& row : convergence_study(bw, depths, a.tol)) {
            csv += std::to_string(row.depth) + "," + io::format_number(row.lambda1) + "\n";
        }
        io::write_atomic(a.convergence_out, csv);
    }
}

// ---------------------------------------------------------------- sweep

struct SweepArgs {
    double beta_min = 0.05;
    double beta_max = 0.45;
    std::size_t steps = 9;
    std::optional<std::size_t> depth;
    double tol = kDefaultEigenTol;
    std::string out;
};

void run_sweep(const SweepArgs& a) {
    require_subcritical(a.beta_min, "--beta-min");
    require_subcritical(a.beta_max, "--beta-max");
    if (a.beta_max < a.beta_min) throw FlagError("--beta-max", "must not be below --beta-min");
    if (a.steps == 0) throw FlagError("--steps", "must be at least 1");
    if (a.steps == 1 && a.beta_max != a.beta_min) {
        throw FlagError("--steps", "a single step needs --beta-min equal to --beta-max");
    }
    require_positive(a.tol, "--tol");
    std::vector<io::SweepRow> rows;
    for (std::size_t i = 0; i < a.steps; ++i) {
        const double beta = a.steps == 1 ? a.beta_min
                                         : a.beta_min + (a.beta_max - a.beta_min) * static_cast<double>(i) /
                                                            static_cast<double>(a.steps - 1);
        const BetaWeight bw = make_beta(beta);
        const std::size_t depth = a.depth ? std::min(*a.depth, max_admissible_depth(bw)) : default_depth(bw);
        if (depth < 2) throw FlagError("--depth", "must be at least 2");
        const EigenResult r = principal_eigenvalue(bw, depth, a.tol);
        rows.push_back({beta, r.lambda1, r.envelope.lower, r.envelope.upper, r.interior_residual});
    }
    emit(a.out, io::sweep_csv(rows));
}

// ---------------------------------------------------------------- evolve

struct EvolveArgs {
    std::uint32_t branching = 2;
    double beta = 0.0;
    std::size_t depth = 8;
    std::string initial = "eigen";
    std::string scheme = "implicit";
    EvolutionConfig config;
    std::vector<double> fit_window;
    std::string out;
    std::string trajectory_out;
    std::vector<double> snapshot_times;
    std::string snapshot_prefix = "snapshot";
};

void run_evolve(const EvolveArgs& a) {
    const BetaWeight bw = checked_beta(a.beta);
    if (a.branching < 2) throw FlagError("--m", "branching factor must be at least 2");
    require_admissible_depth(bw, a.depth);
    EvolutionConfig config = a.config;
    config.scheme = parse_scheme(a.scheme);
    require_positive(config.dt, "--dt");
    require_positive(config.t_end, "--t-end");
    if (config.dt > config.t_end) throw FlagError("--dt", "must not exceed --t-end");
    require_positive(config.picard_tol, "--picard-tol");
    if (config.picard_max_iter <= 0) throw FlagError("--picard-max-iter", "must be positive");
    if (config.quad_points_per_dt == 0) throw FlagError("--quad-points", "must be at least 1");
    double fit_lo = 0.1 * config.t_end;
    double fit_hi = config.t_end;
    if (!a.fit_window.empty()) {
        if (a.fit_window.size() != 2 || !(a.fit_window[0] < a.fit_window[1])) {
            throw FlagError("--fit-window", "expected two increasing times");
        }
        fit_lo = a.fit_window[0];
        fit_hi = a.fit_window[1];
    }
    for (const double t : a.snapshot_times) {
        if (t < 0.0 || t > config.t_end) throw FlagError("--snapshot-times", "time outside [0, t_end]");
    }

    const TruncatedTree tree(a.branching, a.depth);
    const TreeFunction f = initial_datum(a.initial, bw, tree);
    const Trajectory traj = solve(bw, f, config);

    io::EvolutionSummary summary;
    summary.beta = a.beta;
    summary.branching = a.branching;
    summary.depth = a.depth;
    summary.scheme = config.scheme;
    summary.dt = config.dt;
    summary.t_end = config.t_end;
    try {
        summary.fitted_rate = decay_rate(traj, fit_lo, fit_hi);
    } catch (const RangeError& e) {
        throw FlagError("--fit-window", e.what());
    }
    summary.lambda1_ref = reference_eigenpair(bw, a.depth).lambda;

    emit(a.out, io::evolution_summary_json(summary));
    if (!a.trajectory_out.empty()) io::write_atomic(a.trajectory_out, io::trajectory_csv(traj));
    const auto times = traj.times();
    for (const double t : a.snapshot_times) {
        // nearest stored time
        std::size_t best = 0;
        for (std::size_t i = 1; i < times.size(); ++i) {
            if (std::abs(times[i] - t) < std::abs(times[best] - t)) best = i;
        }
        io::write_atomic(a.snapshot_prefix + "_t" + io::format_number(times[best]) + ".csv",
                         io::tree_function_csv(traj.state(best)));
    }
}

// ---------------------------------------------------------------- resolvent

struct ResolventArgs {
    double beta = 0.0;
    std::size_t depth = 200;
    std::optional<double> lambda;
    std::optional<double> fraction;
    std::string out;
};

void run_resolvent(const ResolventArgs& a) {
    const BetaWeight bw = checked_beta(a.beta);
    require_admissible_depth(bw, a.depth);
    if (a.lambda.has_value() == a.fraction.has_value()) {
        throw FlagError("--lambda", "give exactly one of --lambda and --fraction");
    }
    double lambda = 0.0;
    if (a.lambda) {
        require_positive(*a.lambda, "--lambda");
        lambda = *a.lambda;
    } else {
        require_positive(*a.fraction, "--fraction");
        if (*a.fraction >= 1.0) throw FlagError("--fraction", "must be below 1");
        lambda = *a.fraction * reference_eigenpair(bw, a.depth).lambda;
    }
    try {
        emit(a.out, io::level_function_csv(solve_resolvent(bw, lambda, a.depth)));
    } catch (const SpectralWindowError& e) {
        throw FlagError(a.lambda ? "--lambda" : "--fraction", e.what());
    }
}

// ---------------------------------------------------------------- verify

struct VerifyArgs {
    verify::VerifyOptions options;
    std::vector<std::string> suites = {"operator", "spectrum", "evolution"};
    std::string out;
};

void run_verify(const VerifyArgs& a) {
    for (const std::string& s : a.suites) {
        if (s != "operator" && s != "spectrum" && s != "evolution") {
            throw FlagError("--suite", "unknown suite \"" + s + "\" (expected operator, spectrum or evolution)");
        }
    }
    for (const double beta : a.options.betas) require_subcritical(beta, "--betas");
    require_positive(a.options.comparison_tol, "--comparison-tol");
    require_positive(a.options.commutation_tol, "--commutation-tol");
    require_positive(a.options.eigen_tol, "--tol");
    const verify::VerifyReport report = verify::run(a.options, a.suites);
    emit(a.out, report.to_json());
    for (const auto& suite : report.suites) {
        std::cerr << suite.name << ": " << suite.checks << " checks, " << suite.violations.size() << " violations\n";
    }
    if (!report.passed()) throw VerificationFailed("verification recorded violations");
}

// ---------------------------------------------------------------- diagnose-supercritical

struct SupercriticalArgs {
    double beta = 0.5;
    std::vector<std::size_t> depths = {50, 100, 200, 400};
    double tol = kDefaultEigenTol;
    std::string out;
};

void run_supercritical(const SupercriticalArgs& a) {
    const BetaWeight bw = checked_beta(a.beta);
    if (a.beta < 0.5) {
        throw FlagError("--beta", "diagnose-supercritical needs beta in [1/2, 1); use eigen for beta in (0, 1/2)");
    }
    require_positive(a.tol, "--tol");
    if (a.depths.empty()) throw FlagError("--depths", "need at least one depth");
    for (const std::size_t d : a.depths) require_admissible_depth(bw, d, "--depths");
    const auto table = supercritical_diagnostic(bw, a.depths, a.tol);
    bool decreasing = true;
    for (std::size_t i = 1; i < table.size(); ++i) decreasing = decreasing && table[i].lambda1 < table[i - 1].lambda1;
    const InverseSquareFit fit = fit_inverse_square(table);

    nlohmann::json j;
    j["beta"] = a.beta;
    j["depths"] = nlohmann::json::array();
    j["lambda1"] = nlohmann::json::array();
    for (const auto& row : table) {
        j["depths"].push_back(row.depth);
        j["lambda1"].push_back(row.lambda1);
    }
    j["strictly_decreasing"] = decreasing;
    j["inverse_square_fit"] = {{"coefficient", fit.coefficient}, {"max_relative_residual", fit.max_relative_residual}};
    emit(a.out, j.dump(2) + "\n");
}

}  // namespace

int run(int argc, char** argv) {
    CLI::App app{"Principal eigenvalues and heat flow of the beta-Laplacian on regular trees"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "0.1.0");

    EigenArgs eigen;
    auto* eigen_cmd = app.add_subcommand("eigen", "principal eigenvalue for beta in (0, 1/2)");
    eigen_cmd->add_option("--beta", eigen.beta, "beta in (0, 1/2)")->required();
    eigen_cmd->add_option("--depth", eigen.depth, "truncation depth (default min(400, admissible))");
    eigen_cmd->add_option("--tol", eigen.tol, "bisection tolerance");
    eigen_cmd->add_option("--m", eigen.branching, "branching factor recorded in the output");
    eigen_cmd->add_option("--out", eigen.out, "EigenResult JSON (stdout if omitted)");
    eigen_cmd->add_option("--eigenfunction-out", eigen.eigenfunction_out, "eigenfunction as level,value CSV");
    eigen_cmd->add_option("--convergence-out", eigen.convergence_out, "lambda1 against depth as CSV");

    SweepArgs sweep;
    auto* sweep_cmd = app.add_subcommand("sweep", "principal eigenvalue over a beta grid");
    sweep_cmd->add_option("--beta-min", sweep.beta_min, "first beta");
    sweep_cmd->add_option("--beta-max", sweep.beta_max, "last beta");
    sweep_cmd->add_option("--steps", sweep.steps, "number of grid points");
    sweep_cmd->add_option("--depth", sweep.depth, "truncation depth, capped at the admissible maximum");
    sweep_cmd->add_option("--tol", sweep.tol, "bisection tolerance");
    sweep_cmd->add_option("--out", sweep.out, "CSV beta,lambda1,lower,upper,residual");

    EvolveArgs evolve;
    auto* evolve_cmd = app.add_subcommand("evolve", "integrate the heat equation");
    evolve_cmd->add_option("--m", evolve.branching, "branching factor");
    evolve_cmd->add_option("--beta", evolve.beta, "beta in [0, 1)")->required();
    evolve_cmd->add_option("--depth", evolve.depth, "truncation depth");
    evolve_cmd->add_option("--initial", evolve.initial, "eigen | root-indicator | constant:<c> | file:<path>");
    evolve_cmd->add_option("--scheme", evolve.scheme, "implicit | picard");
    evolve_cmd->add_option("--dt", evolve.config.dt, "time step");
    evolve_cmd->add_option("--t-end", evolve.config.t_end, "final time");
    evolve_cmd->add_option("--picard-tol", evolve.config.picard_tol, "Picard stopping tolerance");
    evolve_cmd->add_option("--picard-max-iter", evolve.config.picard_max_iter, "Picard iteration cap");
    evolve_cmd->add_option("--quad-points", evolve.config.quad_points_per_dt, "Picard substeps per dt");
    evolve_cmd->add_option("--picard-window", evolve.config.picard_window, "dt-steps per Picard window (0: all)");
    evolve_cmd->add_option("--fit-window", evolve.fit_window, "t_lo t_hi of the decay fit")->expected(2);
    evolve_cmd->add_option("--out", evolve.out, "summary JSON (stdout if omitted)");
    evolve_cmd->add_option("--trajectory-out", evolve.trajectory_out, "CSV t,supnorm");
    evolve_cmd->add_option("--snapshot-times", evolve.snapshot_times, "times of path,value snapshots");
    evolve_cmd->add_option("--snapshot-prefix", evolve.snapshot_prefix, "snapshot file prefix");

    ResolventArgs resolvent;
    auto* resolvent_cmd = app.add_subcommand("resolvent", "solve (Delta + lambda) phi = -1");
    resolvent_cmd->add_option("--beta", resolvent.beta, "beta in [0, 1)")->required();
    resolvent_cmd->add_option("--depth", resolvent.depth, "truncation depth");
    resolvent_cmd->add_option("--lambda", resolvent.lambda, "spectral parameter");
    resolvent_cmd->add_option("--fraction", resolvent.fraction, "lambda as a fraction of lambda1 at this depth");
    resolvent_cmd->add_option("--out", resolvent.out, "phi as level,value CSV (stdout if omitted)");

    VerifyArgs verify_args;
    auto* verify_cmd = app.add_subcommand("verify", "run the property suites");
    verify_cmd->add_option("--suite", verify_args.suites, "operator, spectrum, evolution");
    verify_cmd->add_option("--seed", verify_args.options.seed, "seed of the randomized checks");
    verify_cmd->add_option("--samples", verify_args.options.operator_samples, "random functions per operator check");
    verify_cmd->add_option("--pairs", verify_args.options.comparison_pairs, "random ordered pairs");
    verify_cmd->add_option("--betas", verify_args.options.betas, "beta grid of the spectrum suite");
    verify_cmd->add_option("--tol", verify_args.options.eigen_tol, "bisection tolerance");
    verify_cmd->add_option("--commutation-tol", verify_args.options.commutation_tol, "operator tolerance");
    verify_cmd->add_option("--comparison-tol", verify_args.options.comparison_tol, "comparison tolerance");
    verify_cmd->add_option("--out", verify_args.out, "JSON report (stdout if omitted)");

    SupercriticalArgs super;
    auto* super_cmd =
        app.add_subcommand("diagnose-supercritical", "truncated eigenvalues against depth for beta in [1/2, 1)");
    super_cmd->add_option("--beta", super.beta, "beta in [1/2, 1)");
    super_cmd->add_option("--depths", super.depths, "truncation depths");
    super_cmd->add_option("--tol", super.tol, "relative bisection tolerance");
    super_cmd->add_option("--out", super.out, "JSON table (stdout if omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    try {
        if (*eigen_cmd) run_eigen(eigen);
        if (*sweep_cmd) run_sweep(sweep);
        if (*evolve_cmd) run_evolve(evolve);
        if (*resolvent_cmd) run_resolvent(resolvent);
        if (*verify_cmd) run_verify(verify_args);
        if (*super_cmd) run_supercritical(super);
    } catch (const VerificationFailed& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace betalap::cli
