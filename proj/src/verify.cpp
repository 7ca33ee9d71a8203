#include "betalap/verify.hpp"

#include "betalap/errors.hpp"
#include "betalap/evolution.hpp"
#include "betalap/io.hpp"
#include "betalap/operator.hpp"
#include "betalap/spectrum.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace betalap::verify {

namespace {

class Recorder {
public:
    explicit Recorder(std::string name) { result_.name = std::move(name); }

    void check(bool ok, const std::string& check, const std::string& detail) {
        ++result_.checks;
        if (!ok) result_.violations.push_back({check, detail});
    }

    SuiteResult take() { return std::move(result_); }

private:
    SuiteResult result_;
};

std::string fmt(double x) { return io::format_number(x); }

std::vector<double> random_values(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
    std::uniform_real_distribution<double> dist(lo, hi);
    std::vector<double> v(n);
    for (double& x : v) x = dist(rng);
    return v;
}

double sup_diff(std::span<const double> a, std::span<const double> b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

}  // namespace

bool VerifyReport::passed() const noexcept {
    return std::all_of(suites.begin(), suites.end(), [](const SuiteResult& s) { return s.passed(); });
}

std::string VerifyReport::to_json() const {
    nlohmann::json j;
    j["seed"] = seed;
    j["passed"] = passed();
    j["suites"] = nlohmann::json::array();
    for (const SuiteResult& s : suites) {
        nlohmann::json js;
        js["name"] = s.name;
        js["checks"] = s.checks;
        js["passed"] = s.passed();
        js["violations"] = nlohmann::json::array();
        for (const Violation& v : s.violations) {
            js["violations"].push_back({{"check", v.check}, {"detail", v.detail}});
        }
        j["suites"].push_back(std::move(js));
    }
    return j.dump(2) + "\n";
}

SuiteResult operator_suite(const VerifyOptions& options) {
    Recorder rec("operator");
    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> beta_dist(0.05, 0.45);
    std::uniform_real_distribution<double> coef_dist(-2.0, 2.0);

    for (std::size_t s = 0; s < options.operator_samples; ++s) {
        const std::uint32_t branching = 2 + static_cast<std::uint32_t>(s % 2);
        const std::size_t depth = 1 + s % 5;
        const BetaWeight bw = make_beta(beta_dist(rng));
        const TruncatedTree tree(branching, depth);
        const TreeFunction u(tree, random_values(rng, tree.node_count(), -1.0, 1.0));
        const TreeFunction v(tree, random_values(rng, tree.node_count(), -1.0, 1.0));
        const std::string where = "m=" + std::to_string(branching) + " L=" + std::to_string(depth) + " beta=" + fmt(bw.beta);

        // level averaging commutes with the Laplacian
        const LevelFunction lhs = level_average(apply_laplacian(bw, u));
        const LevelFunction rhs = apply_laplacian(bw, level_average(u));
        const double scale = std::max(1.0, rhs.sup_norm());
        const double comm = sup_diff(lhs.values(), rhs.values());
        rec.check(comm <= options.commutation_tol * scale, "commutation",
                  where + ": |avg(Lu) - L(avg u)| = " + fmt(comm));

        // linearity
        const double a = coef_dist(rng);
        const double b = coef_dist(rng);
        std::vector<double> combo(tree.node_count());
        for (std::size_t i = 0; i < combo.size(); ++i) combo[i] = a * u[i] + b * v[i];
        const TreeFunction lu = apply_laplacian(bw, u);
        const TreeFunction lv = apply_laplacian(bw, v);
        const TreeFunction lc = apply_laplacian(bw, TreeFunction(tree, combo));
        double lin = 0.0;
        double lin_scale = 1.0;
        for (std::size_t i = 0; i < combo.size(); ++i) {
            lin = std::max(lin, std::abs(lc[i] - (a * lu[i] + b * lv[i])));
            lin_scale = std::max(lin_scale, std::abs(a * lu[i]) + std::abs(b * lv[i]));
        }
        rec.check(lin <= options.linearity_tol * lin_scale, "linearity", where + ": defect " + fmt(lin));

        // m-independence on level-constant data
        const LevelFunction w = level_average(u);
        const LevelFunction direct = apply_laplacian(bw, w);
        for (std::uint32_t mm = 2; mm <= 4; ++mm) {
            const TruncatedTree other(mm, depth);
            const LevelFunction via_tree = level_average(apply_laplacian(bw, embed(other, w)));
            const double d = sup_diff(via_tree.values(), direct.values());
            rec.check(d <= options.commutation_tol * std::max(1.0, direct.sup_norm()), "m_independence",
                      where + " m'=" + std::to_string(mm) + ": difference " + fmt(d));
        }
    }

    // Nonnegative supersolutions decrease across levels. The inputs are
    // chosen so that the sign of the defect is resolved in double precision:
    // explicit supersolutions, and eigenfunctions where p^k stays well above
    // machine epsilon.
    const auto check_decrease = [&rec](bool hypothesis, const LevelFunction& u, const std::string& what) {
        rec.check(hypothesis, "supersolution_hypothesis", what);
        bool decreasing = true;
        for (std::size_t k = 0; k < u.depth(); ++k) decreasing = decreasing && u[k + 1] <= u[k];
        rec.check(decreasing, "monotone_decrease", what);
    };
    for (const double beta : {0.1, 0.25, 0.4}) {
        const BetaWeight bw = make_beta(beta);
        const double shift = 2.0 * bw.weight_ratio / (1.0 - bw.weight_ratio) + 1.0;
        const Supersolution v = build_supersolution(bw, shift, 30);
        const LevelFunction values = v.values();
        const double upper = *std::max_element(values.values().begin(), values.values().end());
        const SupersolutionCertificate cert = check_supersolution(bw, (1.0 - 2.0 * beta) / (2.0 * upper), v);
        check_decrease(cert.valid_including_deepest(), values, "supersolution beta=" + fmt(beta));
    }
    for (const double beta : {0.3, 0.4}) {
        const BetaWeight bw = make_beta(beta);
        const EigenResult eig = principal_eigenvalue(bw, 20, options.eigen_tol);
        const LevelFunction& u = eig.eigenfunction;
        const LevelFunction lap = apply_laplacian(bw, u);
        bool hypothesis = true;
        for (std::size_t k = 0; k <= u.depth(); ++k) hypothesis = hypothesis && lap[k] + 0.5 * eig.lambda1 * u[k] <= 0.0;
        check_decrease(hypothesis, u, "eigenfunction beta=" + fmt(beta));
    }
    return rec.take();
}

SuiteResult spectrum_suite(const VerifyOptions& options) {
    Recorder rec("spectrum");
    const double tol = options.eigen_tol;
    double previous = std::numeric_limits<double>::infinity();
    double previous_beta = 0.0;
    for (const double beta : options.betas) {
        const BetaWeight bw = make_beta(beta);
        const std::size_t depth = default_depth(bw);
        const EigenResult r = principal_eigenvalue(bw, depth, tol);
        const std::string where = "beta=" + fmt(beta) + " L=" + std::to_string(depth);
        const LevelFunction& u = r.eigenfunction;

        rec.check(r.lambda1 > 0.0 && r.lambda1 < 1.0, "eigenvalue_range", where + ": lambda1=" + fmt(r.lambda1));
        rec.check(r.within_bounds(tol), "envelope",
                  where + ": " + fmt(r.lambda1) + " vs [" + fmt(r.envelope.lower) + ", " + fmt(r.envelope.upper) + "]");
        rec.check(r.bracket_lo <= r.lambda1 && r.lambda1 <= r.bracket_hi && r.bracket_hi - r.bracket_lo <= tol,
                  "bracket", where);
        const double tail = std::pow(bw.weight_ratio, static_cast<double>(depth + 1)) / (1.0 - bw.weight_ratio);
        rec.check(r.sum_identity_gap <= tail + 10.0 * tol, "sum_identity", where + ": gap " + fmt(r.sum_identity_gap));
        rec.check(std::abs(u[1] - (1.0 - r.lambda1)) <= 1e-12, "root_relation",
                  where + ": u1 - (1 - lambda1) = " + fmt(u[1] - (1.0 - r.lambda1)));
        const auto inv = inverse_power_table(bw, depth);
        double worst_gap = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k <= depth; ++k) {
            worst_gap = std::min(worst_gap, (u[k] - u.at_or_ghost(k + 1)) * inv[k]);
        }
        rec.check(worst_gap >= r.lambda1 - 10.0 * tol, "gap_lemma", where + ": min gap " + fmt(worst_gap));
        bool shape = u[depth] > 0.0;
        for (std::size_t k = 0; k < depth; ++k) shape = shape && u[k + 1] < u[k];
        rec.check(shape, "positive_decreasing", where);
        rec.check(r.lambda1 <= previous + tol, "monotone_in_beta",
                  where + ": " + fmt(r.lambda1) + " after " + fmt(previous) + " at beta=" + fmt(previous_beta));
        previous = r.lambda1;
        previous_beta = beta;

        // truncation: lambda1^{(L)} non-increasing in L
        double prev_depth_value = std::numeric_limits<double>::infinity();
        for (const std::size_t d : {10u, 20u, 40u, 80u}) {
            if (d > depth) break;
            const double value = principal_eigenvalue(bw, d, tol).lambda1;
            rec.check(value <= prev_depth_value + tol, "monotone_truncation",
                      where + " depth " + std::to_string(d) + ": " + fmt(value));
            prev_depth_value = value;
        }
    }
    return rec.take();
}

SuiteResult evolution_suite(const VerifyOptions& options) {
    Recorder rec("evolution");
    std::mt19937_64 rng(options.seed ^ 0x9e3779b97f4a7c15ULL);
    const BetaWeight bw = make_beta(options.evolution_beta);
    const TruncatedTree tree(options.evolution_m, options.evolution_depth);
    EvolutionConfig config;
    config.dt = options.evolution_dt;
    config.t_end = options.evolution_t_end;
    std::uniform_real_distribution<double> bump(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> node(0, tree.node_count() - 1);

    for (std::size_t s = 0; s < options.comparison_pairs; ++s) {
        const TreeFunction g(tree, random_values(rng, tree.node_count(), -1.0, 1.0));
        std::vector<double> fv(g.values().begin(), g.values().end());
        if (s % 2 == 0) {
            fv[node(rng)] += bump(rng);
        } else {
            for (std::size_t i = 0; i < fv.size(); ++i) fv[i] += 0.5 * bump(rng);
        }
        const TreeFunction f(tree, fv);
        const Trajectory u = solve(bw, f, config);
        const Trajectory v = solve(bw, g, config);
        const ComparisonReport rep = check_parabolic_comparison(u, v, options.comparison_tol);
        rec.check(rep.holds, "comparison",
                  "pair " + std::to_string(s) + ": worst v - u = " + fmt(rep.worst_violation) + " at node " +
                      std::to_string(rep.worst_node) + ", t=" + fmt(rep.worst_time));
        bool monotone = true;
        const auto norms = u.supnorms();
        for (std::size_t i = 1; i < norms.size(); ++i) monotone = monotone && norms[i] <= norms[i - 1];
        rec.check(monotone, "monotone_supnorm", "pair " + std::to_string(s));
        if (s == 0) {
            const Trajectory again = solve(bw, g, config);
            double diff = 0.0;
            for (std::size_t i = 0; i < v.size(); ++i) diff = std::max(diff, sup_diff(v.raw_state(i), again.raw_state(i)));
            rec.check(diff <= options.comparison_tol, "uniqueness", "sup difference " + fmt(diff));
        }
    }

    const EigenResult eig = principal_eigenvalue(bw, tree.depth(), options.eigen_tol);
    const MaximumPrincipleReport eig_rep = check_maximum_principle(bw, embed(tree, eig.eigenfunction));
    rec.check(eig_rep.hypothesis && eig_rep.holds && eig_rep.strictly_positive, "maximum_principle_eigenfunction",
              "min -Lu = " + fmt(eig_rep.min_minus_laplacian));
    const MaximumPrincipleReport zero_rep = check_maximum_principle(bw, TreeFunction(tree));
    rec.check(zero_rep.hypothesis && zero_rep.holds && zero_rep.identically_zero, "maximum_principle_zero", "");
    return rec.take();
}

VerifyReport run(const VerifyOptions& options, const std::vector<std::string>& suites) {
    VerifyReport report;
    report.seed = options.seed;
    for (const std::string& name : suites) {
        if (name == "operator") {
            report.suites.push_back(operator_suite(options));
        } else if (name == "spectrum") {
            report.suites.push_back(spectrum_suite(options));
        } else if (name == "evolution") {
            report.suites.push_back(evolution_suite(options));
        } else {
            throw ConfigError("unknown verification suite \"" + name + "\"");
        }
    }
    return report;
}

}  // namespace betalap::verify
