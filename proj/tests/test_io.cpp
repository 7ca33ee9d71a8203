#include "betalap/errors.hpp"
#include "betalap/io.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <limits>
#include <random>

using namespace betalap;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("betalap_io_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("numbers round-trip exactly") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> dist(-1e3, 1e3);
    for (int i = 0; i < 1000; ++i) {
        const double x = dist(rng) * std::pow(10.0, i % 40 - 20);
        CHECK(io::parse_number(io::format_number(x)) == x);
    }
    for (const double x : {0.0, 1.0, 0.1, 1.0 / 3.0, 5e-324, std::numeric_limits<double>::max()}) {
        CHECK(io::parse_number(io::format_number(x)) == x);
    }
    CHECK(io::format_number(0.5) == "0.5");
    CHECK(io::parse_number(" +2.5 ") == 2.5);
    CHECK_THROWS_AS(io::parse_number("1.0x"), ParseError);
    CHECK_THROWS_AS(io::parse_number(""), ParseError);
}

TEST_CASE("level function CSV round trip") {
    const LevelFunction u(std::vector<double>{1.0, 0.7, 1.0 / 3.0, 1e-300, 0.0});
    const std::string csv = io::level_function_csv(u);
    CHECK(csv.rfind("level,value\n0,1\n", 0) == 0);
    const LevelFunction back = io::parse_level_function_csv(csv);
    REQUIRE(back.size() == u.size());
    for (std::size_t k = 0; k < u.size(); ++k) CHECK(back[k] == u[k]);
}

TEST_CASE("level function CSV errors") {
    CHECK_THROWS_AS(io::parse_level_function_csv(""), ParseError);
    CHECK_THROWS_AS(io::parse_level_function_csv("k,v\n0,1\n"), ParseError);
    CHECK_THROWS_AS(io::parse_level_function_csv("level,value\n"), ParseError);
    CHECK_THROWS_AS(io::parse_level_function_csv("level,value\n0,1\n2,1\n"), ParseError);
    CHECK_THROWS_AS(io::parse_level_function_csv("level,value\n0,1,2\n"), ParseError);
    CHECK_THROWS_AS(io::parse_level_function_csv("level,value\n0,abc\n"), ParseError);
    CHECK_THROWS_AS(io::parse_level_function_csv("level,value\n0,nan\n"), ParseError);
    // blank lines and CRLF are tolerated
    const LevelFunction u = io::parse_level_function_csv("level,value\r\n\r\n0,2\r\n1,1\r\n");
    CHECK(u.size() == 2);
    CHECK(u[0] == 2.0);
}

TEST_CASE("tree function CSV round trip in any row order") {
    const TruncatedTree tree(3, 3);
    std::vector<double> values(tree.node_count());
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = std::sin(static_cast<double>(i)) / 7.0;
    const TreeFunction u(tree, values);
    const std::string csv = io::tree_function_csv(u);
    CHECK(csv.rfind("path,value\n,", 0) == 0);
    CHECK(csv.find("\n2.2.2,") != std::string::npos);
    const TreeFunction back = io::parse_tree_function_csv(csv, tree);
    for (std::size_t i = 0; i < values.size(); ++i) CHECK(back[i] == values[i]);

    // reverse the data rows
    std::vector<std::string> lines;
    std::size_t pos = csv.find('\n') + 1;
    while (pos < csv.size()) {
        const std::size_t nl = csv.find('\n', pos);
        lines.push_back(csv.substr(pos, nl - pos));
        pos = nl + 1;
    }
    std::string reversed = "path,value\n";
    for (auto it = lines.rbegin(); it != lines.rend(); ++it) reversed += *it + "\n";
    const TreeFunction shuffled = io::parse_tree_function_csv(reversed, tree);
    for (std::size_t i = 0; i < values.size(); ++i) CHECK(shuffled[i] == values[i]);
}

TEST_CASE("tree function CSV errors") {
    const TruncatedTree tree(2, 1);
    CHECK_NOTHROW(io::parse_tree_function_csv("path,value\n,1\n0,2\n1,3\n", tree));
    CHECK_THROWS_AS(io::parse_tree_function_csv("path,value\n,1\n0,2\n", tree), ParseError);
    CHECK_THROWS_AS(io::parse_tree_function_csv("path,value\n,1\n0,2\n1,3\n0,4\n", tree), ParseError);
    CHECK_THROWS_AS(io::parse_tree_function_csv("path,value\n,1\n0,2\n1,3\n0.1,4\n", tree), ParseError);
    CHECK_THROWS_AS(io::parse_tree_function_csv("path,value\n,1\n0,2\n2,3\n", tree), ParseError);
    CHECK_THROWS_AS(io::parse_tree_function_csv("path,value\n,1\n0,2\n1,x\n", tree), ParseError);
    CHECK_THROWS_AS(io::parse_tree_function_csv("level,value\n0,1\n", tree), ParseError);
    try {
        io::parse_tree_function_csv("path,value\n,1\n0,2\n", tree);
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("missing node \"1\"") != std::string::npos);
    }
}

TEST_CASE("eigen result JSON fields") {
    const EigenResult r = principal_eigenvalue(make_beta(0.3), 40);
    const auto j = nlohmann::json::parse(io::eigen_result_json(r, 3));
    for (const char* key : {"m", "beta", "depth", "lambda1", "bracket", "lower_bound", "upper_bound",
                            "interior_residual", "sum_identity_gap"}) {
        CHECK(j.contains(key));
    }
    CHECK(j.size() == 9);
    CHECK(j["m"] == 3);
    CHECK(j["depth"] == 40);
    CHECK(j["lambda1"].get<double>() == r.lambda1);
    CHECK(j["bracket"][0].get<double>() <= r.lambda1);
    CHECK(j["bracket"][1].get<double>() >= r.lambda1);
    CHECK(nlohmann::json::parse(io::eigen_result_json(r))["m"].is_null());
}

TEST_CASE("evolution summary JSON") {
    io::EvolutionSummary s;
    s.beta = 0.3;
    s.branching = 2;
    s.depth = 8;
    s.scheme = Scheme::picard;
    s.dt = 1e-3;
    s.t_end = 10.0;
    s.fitted_rate = std::numeric_limits<double>::infinity();
    s.lambda1_ref = 0.25;
    const auto j = nlohmann::json::parse(io::evolution_summary_json(s));
    CHECK(j["scheme"] == "picard");
    CHECK(j["fitted_rate"].is_null());
    CHECK(j["lambda1_ref"].get<double>() == 0.25);
    CHECK(j.size() == 8);
}

TEST_CASE("trajectory and sweep CSV") {
    const TruncatedTree tree(2, 2);
    Trajectory traj(tree, StateLayout::level);
    traj.append(0.0, {1.0, 0.5, -2.0});
    traj.append(0.25, {0.5, 0.25, 0.125});
    CHECK(io::trajectory_csv(traj) == "t,supnorm\n0,2\n0.25,0.5\n");
    const std::vector<io::SweepRow> rows{{0.1, 0.2, 0.15, 0.3, 1e-16}};
    CHECK(io::sweep_csv(rows) == "beta,lambda1,lower,upper,residual\n0.1,0.2,0.15,0.3,1e-16\n");
}

TEST_CASE("atomic write replaces the file and leaves no temporaries") {
    const fs::path dir = scratch_dir("atomic");
    const fs::path target = dir / "out.csv";
    io::write_atomic(target, "first\n");
    CHECK(io::read_file(target) == "first\n");
    io::write_atomic(target, "second\n");
    CHECK(io::read_file(target) == "second\n");
    std::size_t entries = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++entries;
    CHECK(entries == 1);
    CHECK_THROWS_AS(io::write_atomic(dir / "no_such_dir" / "x.csv", "x"), ConfigError);
    CHECK_THROWS_AS(io::read_file(dir / "absent.csv"), ParseError);
    fs::remove_all(dir);
}

}
