#include "betalap/spectrum.hpp"

#include "betalap/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace betalap {

namespace {

constexpr double kBracketInflation = 1e-3;
constexpr int kMaxBracketDoublings = 4;

// True when the trace from u_0 = 1, u_1 = 1 - lambda reaches a nonpositive
// value at or before the ghost level ("lambda too large"). Exact zero counts
// as too large.
bool trace_turns_nonpositive(const BetaWeight& bw, double lambda, std::span<const double> powers) {
    const std::size_t depth = powers.size() - 1;
    double prev = 1.0;
    double cur = 1.0 - lambda;
    if (cur <= 0.0) return true;
    const double inv = 1.0 / (1.0 - bw.beta);
    for (std::size_t k = 1; k <= depth; ++k) {
        const double next = ((1.0 - lambda * powers[k]) * cur - bw.beta * prev) * inv;
        if (!std::isfinite(next)) {
            throw ConfigError("shooting trace overflowed at level " + std::to_string(k + 1));
        }
        if (next <= 0.0) return true;
        prev = cur;
        cur = next;
    }
    return false;
}

void require_subcritical(const BetaWeight& bw) {
    if (bw.beta == 0.0) {
        throw DomainError(
            "beta = 0: every lambda in (0, 1] is a principal eigenvalue with eigenfunction (1 - lambda)^k; "
            "use closed_form_beta0");
    }
    if (bw.beta >= 0.5) {
        throw DomainError("no principal eigenvalue for beta in [1/2, 1) (beta = " + std::to_string(bw.beta) +
                          "); the eigenvalue needs beta in (0, 1/2); use supercritical_diagnostic");
    }
}

SupersolutionCertificate certify(double lambda, const LevelFunction& v, const LevelFunction& lap) {
    SupersolutionCertificate cert;
    cert.lambda = lambda;
    cert.v = v;
    const auto values = v.values();
    cert.min_value = *std::min_element(values.begin(), values.end());
    cert.max_value = *std::max_element(values.begin(), values.end());
    if (cert.min_value <= 0.0) {
        throw DomainError("supersolution candidate must be strictly positive");
    }
    const std::size_t depth = v.depth();
    cert.max_defect = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < depth; ++k) {
        cert.max_defect = std::max(cert.max_defect, lap[k] + lambda * v[k]);
    }
    cert.deepest_defect = lap[depth] + lambda * v[depth];
    if (depth == 0) cert.max_defect = cert.deepest_defect;
    return cert;
}

struct Bracket {
    double lo;
    double hi;
    int steps;
};

// Shrinks [lo, hi] with lo "too small" and hi "too large" until
// hi - lo <= max(abs_tol, rel_tol * hi) or the midpoint stops moving.
Bracket bisect(const BetaWeight& bw, std::span<const double> powers, double lo, double hi, double abs_tol,
               double rel_tol) {
    int steps = 0;
    while (hi - lo > abs_tol && hi - lo > rel_tol * hi) {
        const double mid = lo + 0.5 * (hi - lo);
        if (mid <= lo || mid >= hi) break;
        if (trace_turns_nonpositive(bw, mid, powers)) {
            hi = mid;
        } else {
            lo = mid;
        }
        ++steps;
    }
    return {lo, hi, steps};
}

}  // namespace

// Level Laplacian of v_k = offset + (k + shift) p^k evaluated from the closed
// form in extended precision. Level k is scaled by p^{-k} before the
// cancellation, so the result carries no p^{-k} amplification of rounding.
// The constant part is harmonic everywhere except on the deepest level.
LevelFunction supersolution_laplacian(const BetaWeight& bw, const Supersolution& s) {
    const std::size_t depth = s.variation.depth();
    const long double beta = bw.beta;
    const long double weight_ratio = beta / (1.0L - beta);
    const long double shift = s.shift;
    const long double offset = s.offset;
    std::vector<double> lap(depth + 1);
    const long double child0 = depth >= 1 ? (1.0L + shift) * weight_ratio + offset : 0.0L;
    lap[0] = static_cast<double>(child0 - (offset + shift));
    for (std::size_t k = 1; k <= depth; ++k) {
        const long double kk = static_cast<long double>(k);
        long double value = beta * (kk - 1.0L + shift) / weight_ratio - (kk + shift);
        if (k < depth) {
            value += (1.0L - beta) * (kk + 1.0L + shift) * weight_ratio;
        } else {
            value -= (1.0L - beta) * offset * std::pow(weight_ratio, -kk);
        }
        lap[k] = static_cast<double>(value);
    }
    return LevelFunction(std::move(lap));
}

ShootingTrace shoot(const BetaWeight& bw, double lambda, std::size_t depth) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw DomainError("shooting needs lambda > 0");
    }
    const auto powers = power_table(bw, depth);
    ShootingTrace trace;
    trace.lambda = lambda;
    trace.values.reserve(depth + 2);
    trace.values.push_back(1.0);
    trace.values.push_back(1.0 - lambda);
    if (trace.values[1] <= 0.0) {
        trace.first_nonpositive = 1;
        return trace;
    }
    const double inv = 1.0 / (1.0 - bw.beta);
    for (std::size_t k = 1; k <= depth; ++k) {
        const double next = ((1.0 - lambda * powers[k]) * trace.values[k] - bw.beta * trace.values[k - 1]) * inv;
        if (!std::isfinite(next)) {
            throw ConfigError("shooting trace overflowed at level " + std::to_string(k + 1));
        }
        trace.values.push_back(next);
        if (next <= 0.0) {
            trace.first_nonpositive = k + 1;
            break;
        }
    }
    return trace;
}

EigenvalueBounds bounds(double beta) {
    if (!(beta > 0.0 && beta < 0.5)) {
        throw DomainError("eigenvalue bounds need beta in (0, 1/2), got " + std::to_string(beta));
    }
    const double q = 1.0 - 2.0 * beta;
    return {q * q / (beta * beta + (1.0 - beta) * (1.0 - beta)), q / (1.0 - beta)};
}

std::size_t default_depth(const BetaWeight& bw) { return std::min(kDefaultEigenDepth, max_admissible_depth(bw)); }

LevelFunction chain_eigenfunction(const BetaWeight& bw, double lambda, std::size_t depth) {
    const auto powers = power_table(bw, depth);
    // ratio[k] = u_{k+1} / u_k, with u_{L+1} = 0 on the ghost level.
    std::vector<double> ratio(depth + 1, 0.0);
    for (std::size_t k = depth; k >= 1; --k) {
        const double denom = (1.0 - lambda * powers[k]) - (1.0 - bw.beta) * ratio[k];
        if (!(denom > 0.0)) {
            throw SpectralWindowError("no positive chain eigenfunction for lambda = " + std::to_string(lambda) +
                                      " (ratio denominator at level " + std::to_string(k) + ")");
        }
        ratio[k - 1] = bw.beta / denom;
    }
    std::vector<double> u(depth + 1);
    u[0] = 1.0;
    for (std::size_t k = 0; k < depth; ++k) u[k + 1] = u[k] * ratio[k];
    return LevelFunction(std::move(u));
}

EigenResult principal_eigenvalue(const BetaWeight& bw, std::size_t depth, double tol) {
    require_subcritical(bw);
    if (!(tol > 0.0)) {
        throw DomainError("bisection tolerance must be positive");
    }
    if (depth < 2) {
        throw DomainError("principal_eigenvalue needs depth >= 2");
    }
    const auto powers = power_table(bw, depth);

    EigenResult result;
    result.beta = bw.beta;
    result.depth = depth;
    result.envelope = bounds(bw.beta);

    double lo = result.envelope.lower * (1.0 - kBracketInflation);
    double hi = result.envelope.upper * (1.0 + kBracketInflation);
    if (trace_turns_nonpositive(bw, lo, powers)) {
        throw NoEigenvalueError("lower bracket end " + std::to_string(lo) + " already changes sign for beta = " +
                                std::to_string(bw.beta));
    }
    int doublings = 0;
    while (!trace_turns_nonpositive(bw, hi, powers)) {
        if (doublings++ == kMaxBracketDoublings) {
            throw NoEigenvalueError("no sign change of the shooting trace below lambda = " + std::to_string(hi) +
                                    " for beta = " + std::to_string(bw.beta));
        }
        hi *= 2.0;
    }

    // Bisect down to adjacent doubles rather than stopping at tol: the
    // eigenfunction satisfies the root row u_1 = 1 - lambda only as well as
    // lambda is resolved. The final bracket is then far inside tol.
    const Bracket bracket = bisect(bw, powers, lo, hi, 0.0, 0.0);
    result.bracket_lo = bracket.lo;
    result.bracket_hi = bracket.hi;
    result.lambda1 = bracket.lo + 0.5 * (bracket.hi - bracket.lo);
    result.bisection_steps = bracket.steps;

    result.eigenfunction = chain_eigenfunction(bw, result.lambda1, depth);
    const ResidualReport residual = residual_sup(bw, result.lambda1, result.eigenfunction);
    result.interior_residual = residual.interior;
    result.deepest_residual = residual.deepest;

    double weighted = 0.0;
    for (std::size_t k = 0; k <= depth; ++k) weighted += powers[k] * result.eigenfunction[k];
    result.sum_identity_gap =
        std::abs(result.lambda1 * weighted - (1.0 - 2.0 * bw.beta + bw.beta * result.lambda1));
    return result;
}

LevelFunction closed_form_beta0(double lambda, std::size_t depth) {
    if (!(lambda > 0.0 && lambda <= 1.0)) {
        throw DomainError("beta = 0 eigenfunctions need lambda in (0, 1], got " + std::to_string(lambda));
    }
    std::vector<double> u(depth + 1);
    for (std::size_t k = 0; k <= depth; ++k) u[k] = std::pow(1.0 - lambda, static_cast<double>(k));
    return LevelFunction(std::move(u));
}

LevelFunction Supersolution::values() const {
    std::vector<double> v(variation.values().begin(), variation.values().end());
    for (double& x : v) x += offset;
    return LevelFunction(std::move(v));
}

Supersolution build_supersolution(const BetaWeight& bw, double shift, std::size_t depth) {
    if (!(bw.beta > 0.0 && bw.beta < 0.5)) {
        throw DomainError("the explicit supersolution needs beta in (0, 1/2)");
    }
    const auto powers = power_table(bw, depth);
    std::vector<double> w(depth + 1);
    for (std::size_t k = 0; k <= depth; ++k) w[k] = (static_cast<double>(k) + shift) * powers[k];

    Supersolution s;
    s.offset = 1.0;
    s.variation = LevelFunction(std::move(w));
    s.shift = shift;
    s.root_defect = shift * (bw.weight_ratio - 1.0) + bw.weight_ratio;
    if (!(s.root_defect < 0.0)) {
        s.warning = "shift = " + std::to_string(shift) + " does not exceed p/(1-p) = " +
                    std::to_string(bw.weight_ratio / (1.0 - bw.weight_ratio)) +
                    "; the root defect shift (p-1) + p is not negative";
    }
    return s;
}

SupersolutionCertificate check_supersolution(const BetaWeight& bw, double lambda, const LevelFunction& v) {
    return certify(lambda, v, apply_laplacian(bw, v));
}

SupersolutionCertificate check_supersolution(const BetaWeight& bw, double lambda, const Supersolution& v) {
    return certify(lambda, v.values(), supersolution_laplacian(bw, v));
}

LevelFunction solve_resolvent(const BetaWeight& bw, double lambda, std::size_t depth) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw DomainError("resolvent needs lambda > 0");
    }
    const auto powers = power_table(bw, depth);
    // Rows scaled by p^k:
    //   k = 0:  (lambda - 1) phi_0 + phi_1                           = -1
    //   k >= 1: beta phi_{k-1} + (lambda p^k - 1) phi_k + (1-beta) phi_{k+1} = -p^k
    // The symmetrized matrix is negative definite exactly for lambda below
    // lambda_1^{(L)}, which shows up as a nonnegative elimination pivot.
    std::vector<double> pivot(depth + 1);
    std::vector<double> rhs(depth + 1);
    const auto upper = [&bw](std::size_t k) { return k == 0 ? 1.0 : 1.0 - bw.beta; };
    pivot[0] = lambda - 1.0;
    rhs[0] = -1.0;
    for (std::size_t k = 0;; ++k) {
        if (!(pivot[k] < 0.0)) {
            throw SpectralWindowError("lambda = " + std::to_string(lambda) +
                                      " is not below the truncated principal eigenvalue (pivot at level " +
                                      std::to_string(k) + ")");
        }
        if (k == depth) break;
        const double w = bw.beta / pivot[k];
        pivot[k + 1] = (lambda * powers[k + 1] - 1.0) - w * upper(k);
        rhs[k + 1] = -powers[k + 1] - w * rhs[k];
    }
    std::vector<double> phi(depth + 1);
    phi[depth] = rhs[depth] / pivot[depth];
    for (std::size_t k = depth; k-- > 0;) {
        phi[k] = (rhs[k] - upper(k) * phi[k + 1]) / pivot[k];
    }
    return LevelFunction(std::move(phi));
}

double truncated_eigenvalue(const BetaWeight& bw, std::size_t depth, double rel_tol) {
    if (!(rel_tol > 0.0)) {
        throw DomainError("bisection tolerance must be positive");
    }
    const auto powers = power_table(bw, depth);
    // u_1 = 1 - lambda vanishes at lambda = 1, so the upper end always
    // changes sign; lambda = 0 gives the constant trace.
    const Bracket bracket = bisect(bw, powers, 0.0, 1.0, 0.0, rel_tol);
    return bracket.lo + 0.5 * (bracket.hi - bracket.lo);
}

std::vector<DepthEigenvalue> supercritical_diagnostic(const BetaWeight& bw, std::span<const std::size_t> depths,
                                                      double tol) {
    if (!(bw.beta >= 0.5 && bw.beta < 1.0)) {
        throw DomainError("the supercritical diagnostic needs beta in [1/2, 1)");
    }
    std::vector<DepthEigenvalue> table;
    table.reserve(depths.size());
    for (const std::size_t depth : depths) {
        table.push_back({depth, truncated_eigenvalue(bw, depth, tol)});
    }
    return table;
}

std::vector<DepthEigenvalue> convergence_study(const BetaWeight& bw, std::span<const std::size_t> depths,
                                               double tol) {
    std::vector<DepthEigenvalue> table;
    table.reserve(depths.size());
    for (const std::size_t depth : depths) {
        table.push_back({depth, principal_eigenvalue(bw, depth, tol).lambda1});
    }
    return table;
}

InverseSquareFit fit_inverse_square(std::span<const DepthEigenvalue> table) {
    if (table.empty()) {
        throw DomainError("cannot fit an empty table");
    }
    double log_c = 0.0;
    for (const auto& row : table) {
        if (!(row.lambda1 > 0.0) || row.depth == 0) {
            throw DomainError("inverse-square fit needs positive eigenvalues and depths");
        }
        log_c += std::log(row.lambda1) + 2.0 * std::log(static_cast<double>(row.depth));
    }
    InverseSquareFit fit;
    fit.coefficient = std::exp(log_c / static_cast<double>(table.size()));
    for (const auto& row : table) {
        const double model = fit.coefficient / (static_cast<double>(row.depth) * static_cast<double>(row.depth));
        fit.max_relative_residual = std::max(fit.max_relative_residual, std::abs(row.lambda1 / model - 1.0));
    }
    return fit;
}

}  // namespace betalap
