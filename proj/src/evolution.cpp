#include "betalap/evolution.hpp"

#include "betalap/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace betalap {

namespace {

// Storage layout of a state vector together with the level of each entry.
struct Grid {
    const TruncatedTree* tree;
    StateLayout layout;
    std::vector<std::size_t> level;

    Grid(const TruncatedTree& t, StateLayout l) : tree(&t), layout(l) {
        if (layout == StateLayout::level) {
            level.resize(t.depth() + 1);
            for (std::size_t k = 0; k <= t.depth(); ++k) level[k] = k;
        } else {
            level.resize(t.node_count());
            for (std::size_t k = 0; k <= t.depth(); ++k) {
                std::fill(level.begin() + static_cast<std::ptrdiff_t>(t.level_begin(k)),
                          level.begin() + static_cast<std::ptrdiff_t>(t.level_end(k)), k);
            }
        }
    }

    std::size_t size() const noexcept { return level.size(); }
    std::size_t depth() const noexcept { return tree->depth(); }
};

// Mean of the children of entry i (zero for ghost children).
double child_mean(const Grid& grid, std::span<const double> u, std::size_t i) {
    const std::size_t k = grid.level[i];
    if (k == grid.depth()) return 0.0;
    if (grid.layout == StateLayout::level) return u[k + 1];
    const TruncatedTree& tree = *grid.tree;
    const std::uint32_t branching = tree.branching();
    const std::size_t c0 = tree.level_begin(k + 1) + (i - tree.level_begin(k)) * branching;
    double sum = 0.0;
    for (std::uint32_t c = 0; c < branching; ++c) sum += u[c0 + c];
    return sum / static_cast<double>(branching);
}

double parent_value(const Grid& grid, std::span<const double> u, std::size_t i) {
    const std::size_t k = grid.level[i];
    if (grid.layout == StateLayout::level) return u[k - 1];
    const TruncatedTree& tree = *grid.tree;
    return u[tree.level_begin(k - 1) + (i - tree.level_begin(k)) / tree.branching()];
}

// g = Delta_beta u + s u, i.e. the off-diagonal part of the operator:
// the children mean at the root and s_k (beta u(parent) + (1-beta) mean
// children) below it.
void coupling(const BetaWeight& bw, const Grid& grid, std::span<const double> scale, std::span<const double> u,
              std::span<double> g) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const std::size_t k = grid.level[i];
        const double children = child_mean(grid, u, i);
        g[i] = k == 0 ? children : scale[k] * (bw.beta * parent_value(grid, u, i) + (1.0 - bw.beta) * children);
    }
}

// Backward Euler on the tree with per-level condensation coefficients.
// Every node x on level k satisfies w_x = a_x + b_k w_parent after the
// upward sweep; b_k depends on the level only.
class ImplicitStepper {
public:
    ImplicitStepper(const BetaWeight& bw, std::size_t depth, double dt) : bw_(bw), dt_(dt) {
        if (!(dt > 0.0) || !std::isfinite(dt)) {
            throw ConfigError("time step must be positive");
        }
        const auto scale = inverse_power_table(bw, depth);
        inv_dts_.resize(depth + 1);
        denom_.resize(depth + 1);
        b_.assign(depth + 2, 0.0);
        for (std::size_t k = depth; k >= 1; --k) {
            inv_dts_[k] = 1.0 / (dt * scale[k]);
            denom_[k] = inv_dts_[k] + 1.0 - (1.0 - bw.beta) * b_[k + 1];
            if (!(denom_[k] > 0.0)) {
                throw ConfigError("singular condensation at level " + std::to_string(k));
            }
            b_[k] = bw.beta / denom_[k];
        }
        inv_dts_[0] = 1.0 / dt;
        denom_[0] = inv_dts_[0] + 1.0 - b_[1];
        if (!(denom_[0] > 0.0)) {
            throw ConfigError("singular condensation at the root");
        }
    }

    double dt() const noexcept { return dt_; }

    void step(const Grid& grid, std::span<const double> u, std::span<double> w, std::vector<double>& a) const {
        a.resize(grid.size());
        const std::size_t depth = grid.depth();
        const auto range = [&grid](std::size_t k) -> std::pair<std::size_t, std::size_t> {
            if (grid.layout == StateLayout::level) return {k, k + 1};
            return {grid.tree->level_begin(k), grid.tree->level_end(k)};
        };
        for (std::size_t k = depth; k >= 1; --k) {
            const auto [begin, end] = range(k);
            for (std::size_t i = begin; i < end; ++i) {
                a[i] = (u[i] * inv_dts_[k] + (1.0 - bw_.beta) * child_mean(grid, a, i)) / denom_[k];
            }
        }
        w[0] = (u[0] * inv_dts_[0] + child_mean(grid, a, 0)) / denom_[0];
        for (std::size_t k = 1; k <= depth; ++k) {
            const auto [begin, end] = range(k);
            for (std::size_t i = begin; i < end; ++i) {
                w[i] = a[i] + b_[k] * parent_value(grid, w, i);
            }
        }
    }

private:
    BetaWeight bw_;
    double dt_;
    std::vector<double> inv_dts_;
    std::vector<double> denom_;
    std::vector<double> b_;
};

// Weights of int_0^h e^{(tau-h)s} (g0 (1 - tau/h) + g1 tau/h) dtau = w0 g0 + w1 g1
// and the decay factor e^{-s h}.
struct KernelWeights {
    double decay;
    double w0;
    double w1;
};

// phi1(z) = (1 - e^{-z}) / z,  phi2(z) = (1 - phi1(z)) / z.
void phi_functions(double z, double& phi1, double& phi2) {
    if (z < 0.5) {
        // sum_n (-z)^n / (n+1)!  and  sum_n (-z)^n / (n+2)!
        double term1 = 1.0;
        double term2 = 0.5;
        phi1 = 0.0;
        phi2 = 0.0;
        for (int n = 0; n < 24; ++n) {
            phi1 += term1;
            phi2 += term2;
            term1 *= -z / (n + 2);
            term2 *= -z / (n + 3);
        }
        return;
    }
    phi1 = -std::expm1(-z) / z;
    phi2 = (1.0 - phi1) / z;
}

KernelWeights kernel_weights(double s, double h) {
    const double z = s * h;
    double phi1 = 0.0;
    double phi2 = 0.0;
    phi_functions(z, phi1, phi2);
    return {std::exp(-z), h * (phi1 - phi2), h * phi2};
}

// Relaxation rate of each level in the integral operator: p^{-k} below the
// root and 1 at the root.
std::vector<double> kernel_rates(const BetaWeight& bw, std::size_t depth) {
    auto rates = inverse_power_table(bw, depth);
    rates[0] = 1.0;
    return rates;
}

std::vector<double> initial_state(const TreeFunction& f, StateLayout layout) {
    if (layout == StateLayout::tree) {
        return std::vector<double>(f.values().begin(), f.values().end());
    }
    const TruncatedTree& tree = f.tree();
    std::vector<double> state(tree.depth() + 1);
    for (std::size_t k = 0; k <= tree.depth(); ++k) state[k] = f[tree.level_begin(k)];
    return state;
}

double sup_abs(std::span<const double> v) {
    double s = 0.0;
    for (const double x : v) s = std::max(s, std::abs(x));
    return s;
}

Trajectory solve_implicit(const BetaWeight& bw, const TreeFunction& f, const Grid& grid,
                          const EvolutionConfig& config, std::size_t steps) {
    const ImplicitStepper stepper(bw, grid.depth(), config.dt);
    Trajectory traj(f.tree(), grid.layout);
    std::vector<double> u = initial_state(f, grid.layout);
    std::vector<double> w(u.size());
    std::vector<double> scratch;
    traj.append(0.0, u);
    for (std::size_t j = 1; j <= steps; ++j) {
        stepper.step(grid, u, w, scratch);
        u.swap(w);
        if (j % config.store_every == 0 || j == steps) {
            traj.append(static_cast<double>(j) * config.dt, u);
        }
    }
    return traj;
}

Trajectory solve_picard(const BetaWeight& bw, const TreeFunction& f, const Grid& grid, const EvolutionConfig& config,
                        std::size_t steps) {
    const std::size_t q = config.quad_points_per_dt;
    const double h = config.dt / static_cast<double>(q);
    const std::size_t n = grid.size();
    const auto rates = kernel_rates(bw, grid.depth());
    const auto scale = inverse_power_table(bw, grid.depth());
    std::vector<KernelWeights> weights(grid.depth() + 1);
    for (std::size_t k = 0; k <= grid.depth(); ++k) weights[k] = kernel_weights(rates[k], h);

    const std::size_t window_steps = config.picard_window == 0 ? steps : config.picard_window;

    Trajectory traj(f.tree(), grid.layout);
    std::vector<double> start = initial_state(f, grid.layout);
    traj.append(0.0, start);

    std::vector<double> current;
    std::vector<double> next;
    std::vector<double> g_prev(n);
    std::vector<double> g_next(n);

    std::size_t done = 0;
    while (done < steps) {
        const std::size_t win = std::min(window_steps, steps - done);
        const std::size_t sub = win * q;
        // Iterate starting from the frozen state u^0(., s) = start.
        current.assign((sub + 1) * n, 0.0);
        for (std::size_t j = 0; j <= sub; ++j) std::copy(start.begin(), start.end(), current.begin() + j * n);
        next.assign((sub + 1) * n, 0.0);

        double diff = std::numeric_limits<double>::infinity();
        int iter = 0;
        while (diff > config.picard_tol) {
            if (iter == config.picard_max_iter) {
                throw IterationLimitError("Picard iteration did not reach tolerance " +
                                              std::to_string(config.picard_tol) + " within " +
                                              std::to_string(config.picard_max_iter) + " iterations (residual " +
                                              std::to_string(diff) + ")",
                                          diff);
            }
            ++iter;
            std::copy(start.begin(), start.end(), next.begin());
            coupling(bw, grid, scale, std::span<const double>(current.data(), n), g_prev);
            diff = 0.0;
            for (std::size_t j = 0; j < sub; ++j) {
                coupling(bw, grid, scale, std::span<const double>(current.data() + (j + 1) * n, n), g_next);
                const double* v_old = next.data() + j * n;
                double* v_new = next.data() + (j + 1) * n;
                const double* u_old = current.data() + (j + 1) * n;
                for (std::size_t i = 0; i < n; ++i) {
                    const KernelWeights& kw = weights[grid.level[i]];
                    v_new[i] = kw.decay * v_old[i] + kw.w0 * g_prev[i] + kw.w1 * g_next[i];
                    diff = std::max(diff, std::abs(v_new[i] - u_old[i]));
                }
                g_prev.swap(g_next);
            }
            current.swap(next);
        }
        traj.picard_iterations = std::max(traj.picard_iterations, iter);
        traj.picard_residual = std::max(traj.picard_residual, diff);

        for (std::size_t j = 1; j <= win; ++j) {
            const std::size_t global = done + j;
            if (global % config.store_every == 0 || global == steps) {
                const double* state = current.data() + j * q * n;
                traj.append(static_cast<double>(global) * config.dt, std::vector<double>(state, state + n));
            }
        }
        start.assign(current.end() - static_cast<std::ptrdiff_t>(n), current.end());
        done += win;
    }
    return traj;
}

}  // namespace

std::size_t EvolutionConfig::step_count() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be positive");
    if (!(t_end > 0.0) || !std::isfinite(t_end)) throw ConfigError("t_end must be positive");
    if (dt > t_end) throw ConfigError("dt must not exceed t_end");
    if (!(picard_tol > 0.0)) throw ConfigError("picard_tol must be positive");
    if (picard_max_iter <= 0) throw ConfigError("picard_max_iter must be positive");
    if (quad_points_per_dt == 0) throw ConfigError("quad_points_per_dt must be at least 1");
    if (store_every == 0) throw ConfigError("store_every must be at least 1");
    const double ratio = t_end / dt;
    const double steps = std::round(ratio);
    if (std::abs(ratio - steps) > 1e-9 * ratio) {
        throw ConfigError("t_end = " + std::to_string(t_end) + " is not a whole number of steps dt = " +
                          std::to_string(dt));
    }
    return static_cast<std::size_t>(steps);
}

Trajectory::Trajectory(TruncatedTree tree, StateLayout layout) : tree_(std::move(tree)), layout_(layout) {}

std::size_t Trajectory::state_size() const noexcept {
    return layout_ == StateLayout::level ? tree_.depth() + 1 : tree_.node_count();
}

void Trajectory::append(double t, std::vector<double> state) {
    if (state.size() != state_size()) {
        throw ShapeError("state has " + std::to_string(state.size()) + " entries, expected " +
                         std::to_string(state_size()));
    }
    if (!times_.empty() && !(t > times_.back())) {
        throw RangeError("trajectory times must increase");
    }
    if (times_.empty() && t != 0.0) {
        throw RangeError("trajectory must start at t = 0");
    }
    times_.push_back(t);
    supnorms_.push_back(sup_abs(state));
    states_.push_back(std::move(state));
}

TreeFunction Trajectory::state(std::size_t i) const {
    const auto& s = states_.at(i);
    if (layout_ == StateLayout::tree) return TreeFunction(tree_, s);
    return embed(tree_, LevelFunction(s));
}

double Trajectory::value(std::size_t node, std::size_t i) const {
    const auto& s = states_.at(i);
    return layout_ == StateLayout::tree ? s.at(node) : s.at(tree_.level_of(node));
}

TreeFunction step_implicit(const BetaWeight& bw, const TreeFunction& u, double dt) {
    const Grid grid(u.tree(), StateLayout::tree);
    const ImplicitStepper stepper(bw, grid.depth(), dt);
    std::vector<double> w(u.size());
    std::vector<double> scratch;
    stepper.step(grid, u.values(), w, scratch);
    return TreeFunction(u.tree(), std::move(w));
}

LevelFunction step_implicit(const BetaWeight& bw, const LevelFunction& u, double dt) {
    // The chain needs a tree only for its depth; m = 2 is never read.
    const TruncatedTree chain(2, u.depth());
    const Grid grid(chain, StateLayout::level);
    const ImplicitStepper stepper(bw, grid.depth(), dt);
    std::vector<double> w(u.size());
    std::vector<double> scratch;
    stepper.step(grid, u.values(), w, scratch);
    return LevelFunction(std::move(w));
}

namespace {

// Runs the K recursion along the trajectory grid. `emit(j, V)` receives
// the value at time index j. When t_stop lies strictly inside an interval
// the partial interval is integrated and emitted with index size().
template <typename Emit>
void run_K(const BetaWeight& bw, const Grid& grid, std::span<const double> f, const Trajectory& u, double t_stop,
           Emit&& emit) {
    const std::size_t n = grid.size();
    const auto rates = kernel_rates(bw, grid.depth());
    const auto scale = inverse_power_table(bw, grid.depth());
    const auto times = u.times();

    std::vector<double> v(f.begin(), f.end());
    std::vector<double> g0(n);
    std::vector<double> g1(n);
    std::vector<KernelWeights> weights(grid.depth() + 1);

    const auto state = [&](std::size_t j) { return u.raw_state(j); };
    emit(std::size_t{0}, std::span<const double>(v));
    coupling(bw, grid, scale, state(0), g0);
    for (std::size_t j = 0; j + 1 < times.size() && times[j] < t_stop; ++j) {
        const double h_full = times[j + 1] - times[j];
        coupling(bw, grid, scale, state(j + 1), g1);
        const bool partial = t_stop < times[j + 1];
        const double h = partial ? t_stop - times[j] : h_full;
        for (std::size_t k = 0; k <= grid.depth(); ++k) {
            double phi1 = 0.0;
            double phi2 = 0.0;
            phi_functions(rates[k] * h, phi1, phi2);
            weights[k] = {std::exp(-rates[k] * h), h * phi1, h * phi2};
        }
        // Integrand g0 + (g1 - g0) tau / h_full on [0, h].
        const double slope_scale = h / h_full;
        for (std::size_t i = 0; i < n; ++i) {
            const KernelWeights& kw = weights[grid.level[i]];
            v[i] = kw.decay * v[i] + kw.w0 * g0[i] + kw.w1 * slope_scale * (g1[i] - g0[i]);
        }
        if (partial) {
            emit(times.size(), std::span<const double>(v));
            return;
        }
        emit(j + 1, std::span<const double>(v));
        g0.swap(g1);
    }
}

Grid grid_for(const TreeFunction& f, const Trajectory& u) {
    if (!(f.tree() == u.tree())) {
        throw ShapeError("initial datum and trajectory live on different trees");
    }
    return Grid(u.tree(), u.layout());
}

}  // namespace

TreeFunction apply_K(const BetaWeight& bw, const TreeFunction& f, const Trajectory& u, double t) {
    const auto times = u.times();
    if (times.empty() || t < times.front() || t > times.back()) {
        throw RangeError("t = " + std::to_string(t) + " is outside the trajectory");
    }
    const Grid grid = grid_for(f, u);
    if (grid.layout == StateLayout::level && !is_level_constant(f)) {
        throw ShapeError("a level-chain trajectory needs a level-constant datum");
    }
    const std::vector<double> f_state = initial_state(f, grid.layout);
    std::vector<double> result;
    run_K(bw, grid, f_state, u, t, [&](std::size_t j, std::span<const double> v) {
        if ((j < times.size() && times[j] == t) || j == times.size()) result.assign(v.begin(), v.end());
    });
    if (grid.layout == StateLayout::tree) return TreeFunction(u.tree(), std::move(result));
    return embed(u.tree(), LevelFunction(std::move(result)));
}

Trajectory apply_K(const BetaWeight& bw, const TreeFunction& f, const Trajectory& u) {
    const Grid grid = grid_for(f, u);
    if (grid.layout == StateLayout::level && !is_level_constant(f)) {
        throw ShapeError("a level-chain trajectory needs a level-constant datum");
    }
    const std::vector<double> f_state = initial_state(f, grid.layout);
    Trajectory out(u.tree(), u.layout());
    const auto times = u.times();
    run_K(bw, grid, f_state, u, times.back(), [&](std::size_t j, std::span<const double> v) {
        out.append(times[j], std::vector<double>(v.begin(), v.end()));
    });
    return out;
}

Trajectory solve(const BetaWeight& bw, const TreeFunction& f, const EvolutionConfig& config) {
    const std::size_t steps = config.step_count();
    const StateLayout layout = is_level_constant(f) ? StateLayout::level : StateLayout::tree;
    const Grid grid(f.tree(), layout);
    if (config.scheme == Scheme::implicit) {
        return solve_implicit(bw, f, grid, config, steps);
    }
    return solve_picard(bw, f, grid, config, steps);
}

Trajectory richardson_extrapolate(const Trajectory& coarse, const Trajectory& fine) {
    if (!(coarse.tree() == fine.tree()) || coarse.layout() != fine.layout()) {
        throw ShapeError("Richardson extrapolation needs trajectories on the same tree and layout");
    }
    const auto ct = coarse.times();
    const auto ft = fine.times();
    Trajectory out(coarse.tree(), coarse.layout());
    std::size_t j = 0;
    for (std::size_t i = 0; i < ct.size(); ++i) {
        const double tol = 1e-12 * std::max(1.0, ct[i]);
        while (j < ft.size() && ft[j] < ct[i] - tol) ++j;
        if (j == ft.size() || std::abs(ft[j] - ct[i]) > tol) {
            throw ShapeError("fine trajectory has no state at t = " + std::to_string(ct[i]));
        }
        const auto c = coarse.raw_state(i);
        const auto f = fine.raw_state(j);
        std::vector<double> state(c.size());
        for (std::size_t e = 0; e < c.size(); ++e) state[e] = 2.0 * f[e] - c[e];
        out.append(ct[i], std::move(state));
    }
    return out;
}

double decay_rate(const Trajectory& traj, double t_lo, double t_hi) {
    const auto times = traj.times();
    const auto norms = traj.supnorms();
    std::vector<double> ts;
    std::vector<double> ys;
    bool vanished = false;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] < t_lo || times[i] > t_hi) continue;
        ts.push_back(times[i]);
        if (norms[i] > 0.0) {
            ys.push_back(-std::log(norms[i]));
        } else {
            vanished = true;
        }
    }
    if (ts.size() < 3) {
        throw RangeError("decay fit window [" + std::to_string(t_lo) + ", " + std::to_string(t_hi) +
                         "] holds fewer than three samples");
    }
    if (vanished) return std::numeric_limits<double>::infinity();
    const double n = static_cast<double>(ts.size());
    double t_mean = 0.0;
    double y_mean = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        t_mean += ts[i];
        y_mean += ys[i];
    }
    t_mean /= n;
    y_mean /= n;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        sxy += (ts[i] - t_mean) * (ys[i] - y_mean);
        sxx += (ts[i] - t_mean) * (ts[i] - t_mean);
    }
    return sxy / sxx;
}

ComparisonReport check_parabolic_comparison(const Trajectory& u, const Trajectory& v, double tol) {
    if (!(u.tree() == v.tree())) {
        throw ShapeError("comparison needs trajectories on the same tree");
    }
    const auto tu = u.times();
    const auto tv = v.times();
    if (tu.size() != tv.size() || !std::equal(tu.begin(), tu.end(), tv.begin())) {
        throw ShapeError("comparison needs trajectories on the same time grid");
    }
    ComparisonReport report;
    const std::size_t nodes = u.tree().node_count();
    const bool same_layout = u.layout() == v.layout();
    for (std::size_t i = 0; i < tu.size(); ++i) {
        const auto su = u.raw_state(i);
        const auto sv = v.raw_state(i);
        const std::size_t entries = same_layout ? su.size() : nodes;
        for (std::size_t e = 0; e < entries; ++e) {
            const double gap = same_layout ? sv[e] - su[e] : v.value(e, i) - u.value(e, i);
            if (gap > report.worst_violation) {
                report.worst_violation = gap;
                report.worst_node = (same_layout && u.layout() == StateLayout::level) ? u.tree().level_begin(e) : e;
                report.worst_time = tu[i];
            }
            if (i == 0 && gap > 0.0) report.initial_ordered = false;
        }
    }
    report.holds = report.worst_violation <= tol;
    return report;
}

MaximumPrincipleReport check_maximum_principle(const BetaWeight& bw, const TreeFunction& u) {
    const TreeFunction lap = apply_laplacian(bw, u);
    MaximumPrincipleReport report;
    report.min_minus_laplacian = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < lap.size(); ++i) {
        report.min_minus_laplacian = std::min(report.min_minus_laplacian, -lap[i]);
    }
    report.hypothesis = report.min_minus_laplacian >= 0.0;
    report.min_value = u.min();
    report.strictly_positive = report.min_value > 0.0;
    report.identically_zero = std::all_of(u.values().begin(), u.values().end(), [](double x) { return x == 0.0; });
    if (report.hypothesis) {
        report.holds = report.min_value >= -1e-12;
        if (bw.beta > 0.0) {
            report.holds = report.holds && (report.strictly_positive || report.identically_zero);
        }
    }
    return report;
}

}  // namespace betalap
