#pragma once

#include <stdexcept>
#include <string>

namespace betalap {

// Argument outside the mathematical domain of an operation (root parent,
// beta outside [0,1), nonpositive supersolution, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Index or level outside a truncated tree.
class BoundsError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

// Parameter combination that cannot be evaluated in double precision
// (p^{-L} overflow, tree too large to index, ...).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// lambda at or above the truncated principal eigenvalue in the resolvent.
class SpectralWindowError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Bisection could not bracket a sign change of the shooting trace.
class NoEigenvalueError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IterationLimitError : public std::runtime_error {
public:
    IterationLimitError(const std::string& what, double last_residual)
        : std::runtime_error(what), last_residual_(last_residual) {}

    double last_residual() const noexcept { return last_residual_; }

private:
    double last_residual_;
};

// Time outside a trajectory, or a fit window with too few samples.
class RangeError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

// Two objects that must share a tree or time grid do not.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Malformed text input (paths, CSV rows).
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace betalap
