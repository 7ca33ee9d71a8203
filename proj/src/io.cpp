#include "betalap/io.hpp"

#include "betalap/errors.hpp"

#include <json.hpp>

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <system_error>

namespace betalap::io {

namespace {

using nlohmann::json;

json number_or_null(std::optional<double> x) {
    if (!x || !std::isfinite(*x)) return nullptr;
    return *x;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

// Splits text into non-empty lines, checks the header, and returns the
// remaining lines as (first field, second field) pairs.
std::vector<std::pair<std::string_view, std::string_view>> csv_rows(std::string_view text, std::string_view header) {
    std::vector<std::pair<std::string_view, std::string_view>> rows;
    bool seen_header = false;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const std::size_t nl = text.find('\n');
        std::string_view line = trim(text.substr(0, nl));
        text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
        ++line_no;
        if (line.empty()) continue;
        if (!seen_header) {
            if (line != header) {
                throw ParseError("expected CSV header \"" + std::string(header) + "\", got \"" + std::string(line) +
                                 "\"");
            }
            seen_header = true;
            continue;
        }
        const std::size_t comma = line.find(',');
        if (comma == std::string_view::npos || line.find(',', comma + 1) != std::string_view::npos) {
            throw ParseError("line " + std::to_string(line_no) + ": expected two comma-separated fields");
        }
        rows.emplace_back(trim(line.substr(0, comma)), trim(line.substr(comma + 1)));
    }
    if (!seen_header) throw ParseError("empty CSV input, expected header \"" + std::string(header) + "\"");
    return rows;
}

}  // namespace

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    std::array<char, 64> buf{};
    const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    if (ec != std::errc{}) throw RangeError("cannot format number");
    return std::string(buf.data(), end);
}

double parse_number(std::string_view text) {
    text = trim(text);
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    double x = 0.0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), x);
    if (ec != std::errc{} || end != text.data() + text.size() || text.empty()) {
        throw ParseError("not a number: \"" + std::string(text) + "\"");
    }
    return x;
}

void write_atomic(const std::filesystem::path& path, std::string_view content) {
    namespace fs = std::filesystem;
    const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
    std::random_device rd;
    const fs::path tmp = dir / ("." + path.filename().string() + ".tmp" + std::to_string(rd()));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            std::error_code ignored;
            fs::remove(tmp, ignored);
            throw ConfigError("failed writing " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        std::error_code ignored;
        fs::remove(tmp, ignored);
        throw ConfigError("cannot move output into place at " + path.string() + ": " + ec.message());
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string level_function_csv(const LevelFunction& u) {
    std::string out = "level,value\n";
    for (std::size_t k = 0; k < u.size(); ++k) {
        out += std::to_string(k) + "," + format_number(u[k]) + "\n";
    }
    return out;
}

LevelFunction parse_level_function_csv(std::string_view text) {
    const auto rows = csv_rows(text, "level,value");
    std::vector<double> values;
    for (const auto& [level, value] : rows) {
        std::size_t k = 0;
        const auto [end, ec] = std::from_chars(level.data(), level.data() + level.size(), k);
        if (ec != std::errc{} || end != level.data() + level.size() || level.empty()) {
            throw ParseError("bad level \"" + std::string(level) + "\"");
        }
        if (k != values.size()) {
            throw ParseError("levels must run 0..L in order; got " + std::to_string(k) + " after " +
                             std::to_string(values.size()) + " rows");
        }
        values.push_back(parse_number(value));
    }
    if (values.empty()) throw ParseError("level function CSV has no rows");
    try {
        return LevelFunction(std::move(values));
    } catch (const DomainError& e) {
        throw ParseError(e.what());
    }
}

std::string tree_function_csv(const TreeFunction& u) {
    const TruncatedTree& tree = u.tree();
    std::string out = "path,value\n";
    for (std::size_t i = 0; i < tree.node_count(); ++i) {
        out += tree.index_node(i).to_string() + "," + format_number(u[i]) + "\n";
    }
    return out;
}

TreeFunction parse_tree_function_csv(std::string_view text, const TruncatedTree& tree) {
    const auto rows = csv_rows(text, "path,value");
    std::vector<double> values(tree.node_count(), 0.0);
    std::vector<bool> seen(tree.node_count(), false);
    for (const auto& [path, value] : rows) {
        const NodeId node = NodeId::parse(path, tree.branching());
        if (!tree.contains(node)) {
            throw ParseError("path \"" + std::string(path) + "\" is deeper than the tree");
        }
        const std::size_t i = tree.node_index(node);
        if (seen[i]) throw ParseError("duplicate path \"" + std::string(path) + "\"");
        seen[i] = true;
        values[i] = parse_number(value);
    }
    for (std::size_t i = 0; i < seen.size(); ++i) {
        if (!seen[i]) throw ParseError("missing node \"" + tree.index_node(i).to_string() + "\"");
    }
    try {
        return TreeFunction(tree, std::move(values));
    } catch (const DomainError& e) {
        throw ParseError(e.what());
    }
}

std::string eigen_result_json(const EigenResult& result, std::optional<std::uint32_t> branching) {
    json j;
    j["m"] = branching ? json(*branching) : json(nullptr);
    j["beta"] = result.beta;
    j["depth"] = result.depth;
    j["lambda1"] = result.lambda1;
    j["bracket"] = json::array({result.bracket_lo, result.bracket_hi});
    j["lower_bound"] = result.envelope.lower;
    j["upper_bound"] = result.envelope.upper;
    j["interior_residual"] = result.interior_residual;
    j["sum_identity_gap"] = result.sum_identity_gap;
    return j.dump(2) + "\n";
}

std::string trajectory_csv(const Trajectory& traj) {
    std::string out = "t,supnorm\n";
    const auto times = traj.times();
    const auto norms = traj.supnorms();
    for (std::size_t i = 0; i < times.size(); ++i) {
        out += format_number(times[i]) + "," + format_number(norms[i]) + "\n";
    }
    return out;
}

std::string scheme_name(Scheme scheme) { return scheme == Scheme::implicit ? "implicit" : "picard"; }

std::string evolution_summary_json(const EvolutionSummary& s) {
    json j;
    j["beta"] = s.beta;
    j["m"] = s.branching;
    j["depth"] = s.depth;
    j["scheme"] = scheme_name(s.scheme);
    j["dt"] = s.dt;
    j["t_end"] = s.t_end;
    j["fitted_rate"] = number_or_null(s.fitted_rate);
    j["lambda1_ref"] = number_or_null(s.lambda1_ref);
    return j.dump(2) + "\n";
}

std::string sweep_csv(std::span<const SweepRow> rows) {
    std::string out = "beta,lambda1,lower,upper,residual\n";
    for (const SweepRow& r : rows) {
        out += format_number(r.beta) + "," + format_number(r.lambda1) + "," + format_number(r.lower) + "," +
               format_number(r.upper) + "," + format_number(r.residual) + "\n";
    }
    return out;
}

}  // namespace betalap::io
