#pragma once

#include "betalap/evolution.hpp"
#include "betalap/operator.hpp"
#include "betalap/spectrum.hpp"
#include "betalap/tree.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace betalap::io {

/// Shortest decimal text that parses back to the same double.
std::string format_number(double x);

/// Parses a full decimal number. Throws ParseError on trailing garbage.
double parse_number(std::string_view text);

/// Writes `content` to a temporary file next to `path` and renames it over
/// `path`, so readers never see a partial file.
void write_atomic(const std::filesystem::path& path, std::string_view content);

/// Throws ParseError if the file cannot be read.
std::string read_file(const std::filesystem::path& path);

/// CSV with header "level,value" and rows 0..L.
std::string level_function_csv(const LevelFunction& u);
LevelFunction parse_level_function_csv(std::string_view text);

/// CSV with header "path,value", one row per node in index order.
std::string tree_function_csv(const TreeFunction& u);

/// Accepts rows in any order. Throws ParseError on malformed rows, unknown
/// or duplicate paths, and missing nodes.
TreeFunction parse_tree_function_csv(std::string_view text, const TruncatedTree& tree);

/// {"m", "beta", "depth", "lambda1", "bracket", "lower_bound",
///  "upper_bound", "interior_residual", "sum_identity_gap"}.
std::string eigen_result_json(const EigenResult& result, std::optional<std::uint32_t> branching = std::nullopt);

/// CSV "t,supnorm".
std::string trajectory_csv(const Trajectory& traj);

struct EvolutionSummary {
    double beta = 0.0;
    std::uint32_t branching = 2;
    std::size_t depth = 0;
    Scheme scheme = Scheme::implicit;
    double dt = 0.0;
    double t_end = 0.0;
    // null when the fit is not available (e.g. the solution vanished)
    std::optional<double> fitted_rate;
    std::optional<double> lambda1_ref;
};

std::string evolution_summary_json(const EvolutionSummary& summary);

struct SweepRow {
    double beta = 0.0;
    double lambda1 = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    double residual = 0.0;
};

/// CSV "beta,lambda1,lower,upper,residual".
std::string sweep_csv(std::span<const SweepRow> rows);

std::string scheme_name(Scheme scheme);

}  // namespace betalap::io
