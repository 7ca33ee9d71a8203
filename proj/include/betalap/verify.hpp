#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace betalap::verify {

/// Counts and tolerances of the property suites. Randomized checks draw
/// from a generator seeded with `seed`, so a fixed seed reproduces a run.
struct VerifyOptions {
    std::uint64_t seed = 20240601;

    // operator suite
    std::size_t operator_samples = 50;
    double commutation_tol = 1e-12;
    double linearity_tol = 1e-12;

    // spectrum suite
    std::vector<double> betas = {0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45};
    double eigen_tol = 1e-12;

    // evolution suite
    std::size_t comparison_pairs = 100;
    double comparison_tol = 1e-12;
    std::uint32_t evolution_m = 2;
    std::size_t evolution_depth = 8;
    double evolution_beta = 0.3;
    double evolution_dt = 1e-2;
    double evolution_t_end = 1.0;
};

struct Violation {
    std::string check;
    std::string detail;
};

struct SuiteResult {
    std::string name;
    std::size_t checks = 0;
    std::vector<Violation> violations;

    bool passed() const noexcept { return violations.empty(); }
};

struct VerifyReport {
    std::uint64_t seed = 0;
    std::vector<SuiteResult> suites;

    bool passed() const noexcept;
    std::string to_json() const;
};

/// Linearity, level-average commutation, m-independence and monotone
/// decrease of nonnegative supersolutions.
SuiteResult operator_suite(const VerifyOptions& options);

/// Envelope, monotonicity in beta and depth, sum identity, root relation,
/// gap lemma, positivity and strict decrease of eigenfunctions.
SuiteResult spectrum_suite(const VerifyOptions& options);

/// Parabolic comparison on random ordered pairs, uniqueness, monotone
/// sup-norm and the maximum principle.
SuiteResult evolution_suite(const VerifyOptions& options);

/// Runs the named suites ("operator", "spectrum", "evolution") in order.
/// Throws ConfigError on an unknown name.
VerifyReport run(const VerifyOptions& options, const std::vector<std::string>& suites);

}  // namespace betalap::verify
