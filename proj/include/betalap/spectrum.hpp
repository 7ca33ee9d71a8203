#pragma once

#include "betalap/operator.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace betalap {

/// Forward solution of the level eigen-recurrence
///   u_0 = 1,  u_1 = 1 - lambda,
///   u_{k+1} = ((1 - lambda p^k) u_k - beta u_{k-1}) / (1 - beta),
/// over levels 0..L+1, stopped at the first nonpositive entry.
struct ShootingTrace {
    double lambda = 0.0;
    std::vector<double> values;
    std::optional<std::size_t> first_nonpositive;
};

/// Throws DomainError for lambda <= 0 and ConfigError if the trace
/// overflows or (beta, depth) is not admissible.
ShootingTrace shoot(const BetaWeight& bw, double lambda, std::size_t depth);

/// Closed-form enclosure of lambda_1(beta) for 0 < beta < 1/2:
///   (1-2b)^2 / (b^2 + (1-b)^2) <= lambda_1 <= (1-2b) / (1-b).
struct EigenvalueBounds {
    double lower = 0.0;
    double upper = 0.0;
};

EigenvalueBounds bounds(double beta);

struct EigenResult {
    double beta = 0.0;
    std::size_t depth = 0;
    double lambda1 = 0.0;
    double bracket_lo = 0.0;
    double bracket_hi = 0.0;
    // Normalized so that u_0 = 1.
    LevelFunction eigenfunction;
    double interior_residual = 0.0;
    double deepest_residual = 0.0;
    // |lambda1 sum_k p^k u_k - (1 - 2 beta + beta lambda1)|
    double sum_identity_gap = 0.0;
    EigenvalueBounds envelope;
    int bisection_steps = 0;

    bool within_bounds(double tol) const noexcept {
        return lambda1 >= envelope.lower - tol && lambda1 <= envelope.upper + tol;
    }
};

inline constexpr double kDefaultEigenTol = 1e-12;
inline constexpr std::size_t kDefaultEigenDepth = 400;

/// min(400, max_admissible_depth(beta)).
std::size_t default_depth(const BetaWeight& bw);

/// Principal eigenvalue lambda_1^{(L)} of the ghost-truncated chain for
/// 0 < beta < 1/2, by bisection on the sign pattern of the shooting trace.
/// beta = 0 and beta >= 1/2 are rejected with DomainError pointing at
/// closed_form_beta0 and supercritical_diagnostic respectively.
EigenResult principal_eigenvalue(const BetaWeight& bw, std::size_t depth, double tol = kDefaultEigenTol);

/// Positive eigenfunction of the truncated chain for a given lambda, from
/// the downward-stable ratio recurrence anchored at the ghost level.
/// Normalized to u_0 = 1. Throws SpectralWindowError if a ratio
/// denominator is not positive.
LevelFunction chain_eigenfunction(const BetaWeight& bw, double lambda, std::size_t depth);

/// u_k = (1 - lambda)^k, the beta = 0 principal eigenfunctions.
LevelFunction closed_form_beta0(double lambda, std::size_t depth);

/// A level function stored as offset + variation. The constant part has a
/// known Laplacian, so defects are evaluated without the p^{-k}
/// amplification of its rounding.
struct Supersolution {
    double offset = 0.0;
    LevelFunction variation;
    double shift = 0.0;
    double root_defect = 0.0;
    // Empty when the root defect a(p-1)+p is negative.
    std::string warning;

    LevelFunction values() const;
};

/// v_k = 1 + (k + shift) p^k.
Supersolution build_supersolution(const BetaWeight& bw, double shift, std::size_t depth);

/// Delta_beta v on levels 0..L from the closed form, in extended precision.
LevelFunction supersolution_laplacian(const BetaWeight& bw, const Supersolution& s);

struct SupersolutionCertificate {
    double lambda = 0.0;
    LevelFunction v;
    double min_value = 0.0;
    double max_value = 0.0;
    // max over levels 0..L-1 of Delta_beta v + lambda v
    double max_defect = 0.0;
    // same quantity on the deepest level, where the ghost level acts
    double deepest_defect = 0.0;

    bool valid() const noexcept { return min_value > 0.0 && max_defect <= 0.0; }
    bool valid_including_deepest() const noexcept { return valid() && deepest_defect <= 0.0; }
};

/// Throws DomainError if v has a nonpositive entry.
SupersolutionCertificate check_supersolution(const BetaWeight& bw, double lambda, const LevelFunction& v);
SupersolutionCertificate check_supersolution(const BetaWeight& bw, double lambda, const Supersolution& v);

/// Solves (Delta_beta + lambda) phi = -1 on levels 0..L with phi_{L+1} = 0
/// by one elimination sweep and one back substitution. Throws
/// SpectralWindowError once lambda reaches lambda_1^{(L)}.
LevelFunction solve_resolvent(const BetaWeight& bw, double lambda, std::size_t depth);

/// Truncated principal eigenvalue for any beta in [0,1), bracketing on
/// [0, 1] and stopping on the relative width hi - lo <= rel_tol * hi.
double truncated_eigenvalue(const BetaWeight& bw, std::size_t depth, double rel_tol);

struct DepthEigenvalue {
    std::size_t depth = 0;
    double lambda1 = 0.0;
};

/// lambda_1^{(L)} for each depth, for beta in [1/2, 1) where no principal
/// eigenvalue of the infinite tree exists. `tol` is relative.
std::vector<DepthEigenvalue> supercritical_diagnostic(const BetaWeight& bw, std::span<const std::size_t> depths,
                                                      double tol = kDefaultEigenTol);

/// lambda_1^{(L)} for each depth, for 0 < beta < 1/2.
std::vector<DepthEigenvalue> convergence_study(const BetaWeight& bw, std::span<const std::size_t> depths,
                                               double tol = kDefaultEigenTol);

/// Least-squares fit lambda ~ c L^{-2} in log-log coordinates with the
/// exponent pinned to -2.
struct InverseSquareFit {
    double coefficient = 0.0;
    double max_relative_residual = 0.0;
};

InverseSquareFit fit_inverse_square(std::span<const DepthEigenvalue> table);

}  // namespace betalap
