#include "betalap/errors.hpp"
#include "betalap/evolution.hpp"
#include "betalap/operator.hpp"
#include "betalap/spectrum.hpp"
#include "betalap/tree.hpp"
#include "betalap/verify.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

namespace py = pybind11;
using namespace betalap;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<double> to_vector(const Array& a) {
    if (a.ndim() != 1) throw ShapeError("expected a one-dimensional array");
    return std::vector<double>(a.data(), a.data() + a.size());
}

Array to_array(std::span<const double> v) {
    Array out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

std::size_t depth_or_default(const BetaWeight& bw, std::optional<std::size_t> depth) {
    return depth ? *depth : default_depth(bw);
}

// A solved trajectory with every state expanded to the full tree.
struct PyTrajectory {
    Trajectory traj;

    Array times() const { return to_array(traj.times()); }
    Array supnorms() const { return to_array(traj.supnorms()); }

    Array states() const {
        const auto rows = static_cast<py::ssize_t>(traj.size());
        const auto cols = static_cast<py::ssize_t>(traj.tree().node_count());
        Array out({rows, cols});
        double* dst = out.mutable_data();
        for (std::size_t i = 0; i < traj.size(); ++i) {
            const TreeFunction s = traj.state(i);
            std::copy(s.values().begin(), s.values().end(), dst + i * static_cast<std::size_t>(cols));
        }
        return out;
    }
};

EvolutionConfig make_config(const std::string& scheme, double dt, double t_end, double picard_tol, int picard_max_iter,
                            std::size_t quad_points, std::size_t picard_window, std::size_t store_every) {
    EvolutionConfig c;
    if (scheme == "implicit") {
        c.scheme = Scheme::implicit;
    } else if (scheme == "picard") {
        c.scheme = Scheme::picard;
    } else {
        throw ConfigError("scheme must be \"implicit\" or \"picard\", got \"" + scheme + "\"");
    }
    c.dt = dt;
    c.t_end = t_end;
    c.picard_tol = picard_tol;
    c.picard_max_iter = picard_max_iter;
    c.quad_points_per_dt = quad_points;
    c.picard_window = picard_window;
    c.store_every = store_every;
    return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "beta-Laplacian on regular trees: spectrum and heat flow";

    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<SpectralWindowError>(m, "SpectralWindowError", PyExc_ValueError);
    py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<BoundsError>(m, "BoundsError", PyExc_IndexError);
    py::register_exception<RangeError>(m, "RangeError", PyExc_IndexError);
    py::register_exception<NoEigenvalueError>(m, "NoEigenvalueError", PyExc_RuntimeError);
    py::register_exception<IterationLimitError>(m, "IterationLimitError", PyExc_RuntimeError);

    // ------------------------------------------------------------ tree
    m.def(
        "psi", [](const std::string& path, std::uint32_t branching) { return psi(NodeId::parse(path, branching), branching); },
        py::arg("path"), py::arg("branching"), "Boundary coordinate of the node with dot-separated path.");
    m.def(
        "node_paths",
        [](std::uint32_t branching, std::size_t depth) {
            const TruncatedTree tree(branching, depth);
            std::vector<std::string> out;
            out.reserve(tree.node_count());
            for (std::size_t i = 0; i < tree.node_count(); ++i) out.push_back(tree.index_node(i).to_string());
            return out;
        },
        py::arg("branching"), py::arg("depth"), "Node paths in breadth-first index order.");

    // ------------------------------------------------------------ operator
    m.def(
        "max_admissible_depth", [](double beta) { return max_admissible_depth(make_beta(beta)); }, py::arg("beta"));
    m.def(
        "default_depth", [](double beta) { return default_depth(make_beta(beta)); }, py::arg("beta"));
    m.def(
        "level_laplacian",
        [](double beta, const Array& u) {
            return to_array(apply_laplacian(make_beta(beta), LevelFunction(to_vector(u))).values());
        },
        py::arg("beta"), py::arg("u"), "Laplacian of a level-constant function given per level.");
    m.def(
        "tree_laplacian",
        [](std::uint32_t branching, std::size_t depth, double beta, const Array& u) {
            const TreeFunction f(TruncatedTree(branching, depth), to_vector(u));
            return to_array(apply_laplacian(make_beta(beta), f).values());
        },
        py::arg("branching"), py::arg("depth"), py::arg("beta"), py::arg("u"));
    m.def(
        "level_average",
        [](std::uint32_t branching, std::size_t depth, const Array& u) {
            return to_array(level_average(TreeFunction(TruncatedTree(branching, depth), to_vector(u))).values());
        },
        py::arg("branching"), py::arg("depth"), py::arg("u"));

    // ------------------------------------------------------------ spectrum
    m.def(
        "bounds",
        [](double beta) {
            const EigenvalueBounds b = bounds(beta);
            return py::make_tuple(b.lower, b.upper);
        },
        py::arg("beta"), "Closed-form (lower, upper) enclosure of lambda_1.");

    py::class_<EigenResult>(m, "EigenResult")
        .def_readonly("beta", &EigenResult::beta)
        .def_readonly("depth", &EigenResult::depth)
        .def_readonly("lambda1", &EigenResult::lambda1)
        .def_readonly("bracket_lo", &EigenResult::bracket_lo)
        .def_readonly("bracket_hi", &EigenResult::bracket_hi)
        .def_readonly("interior_residual", &EigenResult::interior_residual)
        .def_readonly("sum_identity_gap", &EigenResult::sum_identity_gap)
        .def_readonly("bisection_steps", &EigenResult::bisection_steps)
        .def_property_readonly("eigenfunction", [](const EigenResult& r) { return to_array(r.eigenfunction.values()); })
        .def_property_readonly("lower_bound", [](const EigenResult& r) { return r.envelope.lower; })
        .def_property_readonly("upper_bound", [](const EigenResult& r) { return r.envelope.upper; })
        .def("__repr__", [](const EigenResult& r) {
            return "EigenResult(beta=" + std::to_string(r.beta) + ", depth=" + std::to_string(r.depth) +
                   ", lambda1=" + std::to_string(r.lambda1) + ")";
        });

    m.def(
        "principal_eigenvalue",
        [](double beta, std::optional<std::size_t> depth, double tol) {
            const BetaWeight bw = make_beta(beta);
            return principal_eigenvalue(bw, depth_or_default(bw, depth), tol);
        },
        py::arg("beta"), py::arg("depth") = py::none(), py::arg("tol") = kDefaultEigenTol);
    m.def(
        "chain_eigenfunction",
        [](double beta, double lambda, std::size_t depth) {
            return to_array(chain_eigenfunction(make_beta(beta), lambda, depth).values());
        },
        py::arg("beta"), py::arg("lam"), py::arg("depth"));
    m.def(
        "closed_form_beta0", [](double lambda, std::size_t depth) { return to_array(closed_form_beta0(lambda, depth).values()); },
        py::arg("lam"), py::arg("depth"));
    m.def(
        "build_supersolution",
        [](double beta, double shift, std::size_t depth) {
            const BetaWeight bw = make_beta(beta);
            const Supersolution s = build_supersolution(bw, shift, depth);
            py::dict d;
            d["values"] = to_array(s.values().values());
            d["laplacian"] = to_array(supersolution_laplacian(bw, s).values());
            d["root_defect"] = s.root_defect;
            d["warning"] = s.warning;
            return d;
        },
        py::arg("beta"), py::arg("shift"), py::arg("depth"), "v_k = 1 + (k + shift) p^k with its closed-form Laplacian.");
    m.def(
        "check_supersolution",
        [](double beta, double lambda, const Array& v) {
            const SupersolutionCertificate c = check_supersolution(make_beta(beta), lambda, LevelFunction(to_vector(v)));
            py::dict d;
            d["lambda"] = c.lambda;
            d["min_value"] = c.min_value;
            d["max_value"] = c.max_value;
            d["max_defect"] = c.max_defect;
            d["deepest_defect"] = c.deepest_defect;
            d["valid"] = c.valid();
            d["valid_including_deepest"] = c.valid_including_deepest();
            return d;
        },
        py::arg("beta"), py::arg("lam"), py::arg("v"));
    m.def(
        "solve_resolvent",
        [](double beta, double lambda, std::size_t depth) {
            return to_array(solve_resolvent(make_beta(beta), lambda, depth).values());
        },
        py::arg("beta"), py::arg("lam"), py::arg("depth"));
    m.def(
        "supercritical_diagnostic",
        [](double beta, const std::vector<std::size_t>& depths, double tol) {
            std::vector<std::pair<std::size_t, double>> out;
            for (const DepthEigenvalue& row : supercritical_diagnostic(make_beta(beta), depths, tol)) {
                out.emplace_back(row.depth, row.lambda1);
            }
            return out;
        },
        py::arg("beta"), py::arg("depths"), py::arg("tol") = kDefaultEigenTol);
    m.def(
        "fit_inverse_square",
        [](const std::vector<std::pair<std::size_t, double>>& table) {
            std::vector<DepthEigenvalue> rows;
            for (const auto& [depth, lambda] : table) rows.push_back({depth, lambda});
            const InverseSquareFit fit = fit_inverse_square(rows);
            return py::make_tuple(fit.coefficient, fit.max_relative_residual);
        },
        py::arg("table"), "Fit lambda ~ c L^-2; returns (c, max relative residual).");

    // ------------------------------------------------------------ evolution
    py::class_<PyTrajectory>(m, "Trajectory")
        .def_property_readonly("times", &PyTrajectory::times)
        .def_property_readonly("supnorms", &PyTrajectory::supnorms)
        .def_property_readonly("states", &PyTrajectory::states, "States on every node, shape (times, nodes).")
        .def_property_readonly("picard_iterations", [](const PyTrajectory& t) { return t.traj.picard_iterations; })
        .def_property_readonly("picard_residual", [](const PyTrajectory& t) { return t.traj.picard_residual; })
        .def(
            "decay_rate", [](const PyTrajectory& t, double lo, double hi) { return decay_rate(t.traj, lo, hi); },
            py::arg("t_lo"), py::arg("t_hi"))
        .def("__len__", [](const PyTrajectory& t) { return t.traj.size(); });

    m.def(
        "evolve",
        [](std::uint32_t branching, std::size_t depth, double beta, const Array& initial, const std::string& scheme,
           double dt, double t_end, double picard_tol, int picard_max_iter, std::size_t quad_points,
           std::size_t picard_window, std::size_t store_every) {
            const TreeFunction f(TruncatedTree(branching, depth), to_vector(initial));
            const EvolutionConfig c =
                make_config(scheme, dt, t_end, picard_tol, picard_max_iter, quad_points, picard_window, store_every);
            py::gil_scoped_release release;
            return PyTrajectory{solve(make_beta(beta), f, c)};
        },
        py::arg("branching"), py::arg("depth"), py::arg("beta"), py::arg("initial"), py::arg("scheme") = "implicit",
        py::arg("dt") = 1e-3, py::arg("t_end") = 10.0, py::arg("picard_tol") = 1e-10, py::arg("picard_max_iter") = 200,
        py::arg("quad_points") = 1, py::arg("picard_window") = 0, py::arg("store_every") = 1,
        "Integrates u_t = Delta_beta u from per-node initial values.");
    m.def(
        "step_implicit",
        [](std::uint32_t branching, std::size_t depth, double beta, const Array& u, double dt) {
            const TreeFunction f(TruncatedTree(branching, depth), to_vector(u));
            return to_array(step_implicit(make_beta(beta), f, dt).values());
        },
        py::arg("branching"), py::arg("depth"), py::arg("beta"), py::arg("u"), py::arg("dt"));
    m.def(
        "apply_K",
        [](double beta, const Array& initial, const PyTrajectory& u) {
            const TreeFunction f(u.traj.tree(), to_vector(initial));
            return PyTrajectory{apply_K(make_beta(beta), f, u.traj)};
        },
        py::arg("beta"), py::arg("initial"), py::arg("u"), "The integral operator applied at every stored time.");

    // ------------------------------------------------------------ verify
    m.def(
        "verify",
        [](const std::vector<std::string>& suites, std::uint64_t seed, std::size_t samples, std::size_t pairs) {
            verify::VerifyOptions options;
            options.seed = seed;
            options.operator_samples = samples;
            options.comparison_pairs = pairs;
            py::gil_scoped_release release;
            return verify::run(options, suites).to_json();
        },
        py::arg("suites") = std::vector<std::string>{"operator", "spectrum", "evolution"},
        py::arg("seed") = verify::VerifyOptions{}.seed, py::arg("samples") = verify::VerifyOptions{}.operator_samples,
        py::arg("pairs") = verify::VerifyOptions{}.comparison_pairs, "Runs the property suites; returns the JSON report.");
}
