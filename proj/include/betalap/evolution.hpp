#pragma once

#include "betalap/operator.hpp"
#include "betalap/spectrum.hpp"

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace betalap {

enum class Scheme { implicit, picard };

struct EvolutionConfig {
    Scheme scheme = Scheme::implicit;
    double dt = 1e-3;
    double t_end = 10.0;
    double picard_tol = 1e-10;
    int picard_max_iter = 200;
    // Picard substeps per dt: the fixed-point iteration runs on a grid of
    // spacing dt / quad_points_per_dt and reports every quad_points_per_dt-th
    // state.
    std::size_t quad_points_per_dt = 1;
    // Number of dt-steps per Picard window; 0 iterates over [0, t_end] at
    // once. Windows restart the iteration from the last converged state.
    std::size_t picard_window = 0;
    // Keep every store_every-th state of the dt grid (the final state is
    // always kept).
    std::size_t store_every = 1;

    /// Throws ConfigError on nonpositive steps or tolerances, dt > t_end, or
    /// t_end not a whole number of steps.
    std::size_t step_count() const;
};

enum class StateLayout {
    tree,   // one value per node
    level,  // one value per level, for level-constant solutions
};

/// Time series of solution states on a truncated tree. States are stored
/// per node, or per level when the solution is level-constant.
class Trajectory {
public:
    Trajectory(TruncatedTree tree, StateLayout layout);

    /// Appends a state at a time later than the last one.
    void append(double t, std::vector<double> state);

    const TruncatedTree& tree() const noexcept { return tree_; }
    StateLayout layout() const noexcept { return layout_; }
    std::size_t state_size() const noexcept;
    std::size_t size() const noexcept { return times_.size(); }

    std::span<const double> times() const noexcept { return times_; }
    std::span<const double> supnorms() const noexcept { return supnorms_; }
    std::span<const double> raw_state(std::size_t i) const { return states_.at(i); }

    /// State i on every node of the tree.
    TreeFunction state(std::size_t i) const;
    double value(std::size_t node, std::size_t i) const;

    int picard_iterations = 0;
    double picard_residual = 0.0;

private:
    TruncatedTree tree_;
    StateLayout layout_;
    std::vector<double> times_;
    std::vector<std::vector<double>> states_;
    std::vector<double> supnorms_;
};

/// One backward Euler step: solves (I - dt Delta_beta) w = u by condensing
/// the tree from the deepest level to the root and substituting back.
/// The ghost level stays at zero.
TreeFunction step_implicit(const BetaWeight& bw, const TreeFunction& u, double dt);
LevelFunction step_implicit(const BetaWeight& bw, const LevelFunction& u, double dt);

/// K_beta^f u at time t:
///   e^{-t s_x} f(x) + int_0^t e^{(s-t) s_x} (Delta_beta u + s_x u)(x, s) ds,
/// s_x = p^{-|x|}. The integrand is interpolated linearly between the
/// trajectory's times and integrated against the exact exponential kernel.
/// Throws RangeError if t is outside the trajectory.
TreeFunction apply_K(const BetaWeight& bw, const TreeFunction& f, const Trajectory& u, double t);

/// K_beta^f u at every time of the trajectory, in the trajectory's layout.
Trajectory apply_K(const BetaWeight& bw, const TreeFunction& f, const Trajectory& u);

/// Integrates u_t = Delta_beta u from f. Level-constant data run on the
/// level chain. Throws IterationLimitError when Picard iteration does not
/// reach picard_tol.
Trajectory solve(const BetaWeight& bw, const TreeFunction& f, const EvolutionConfig& config);

/// Combines first-order trajectories on grids dt and dt/2 into
/// 2 u_{dt/2} - u_{dt} on the coarse grid.
Trajectory richardson_extrapolate(const Trajectory& coarse, const Trajectory& fine);

/// Least-squares slope of -log(supnorm) against t over samples with
/// t_lo <= t <= t_hi. Returns +infinity when a supnorm in the window is
/// zero. Throws RangeError with fewer than three samples.
double decay_rate(const Trajectory& traj, double t_lo, double t_hi);

inline constexpr double kComparisonTol = 1e-12;

struct ComparisonReport {
    bool holds = true;
    bool initial_ordered = true;
    // max over nodes and times of v - u (negative when strictly ordered)
    double worst_violation = -std::numeric_limits<double>::infinity();
    std::size_t worst_node = 0;
    double worst_time = 0.0;
};

/// Checks u >= v - tol at every node and stored time. Throws ShapeError
/// when the trees or time grids differ.
ComparisonReport check_parabolic_comparison(const Trajectory& u, const Trajectory& v, double tol = kComparisonTol);

struct MaximumPrincipleReport {
    // -Delta_beta u >= 0 at every node
    bool hypothesis = false;
    bool holds = true;
    double min_value = 0.0;
    double min_minus_laplacian = 0.0;
    bool strictly_positive = false;
    bool identically_zero = false;
};

/// Evaluates the maximum principle on u: when -Delta_beta u >= 0, u must be
/// >= -1e-12, and for beta > 0 either strictly positive or identically
/// zero. Violations are reported, never thrown.
MaximumPrincipleReport check_maximum_principle(const BetaWeight& bw, const TreeFunction& u);

}  // namespace betalap
