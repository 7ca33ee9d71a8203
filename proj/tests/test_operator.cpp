#include "betalap/errors.hpp"
#include "betalap/operator.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace betalap;

namespace {

std::map<NodeId, double> as_map(const TreeFunction& u) {
    std::map<NodeId, double> out;
    for (std::size_t i = 0; i < u.size(); ++i) out[u.tree().index_node(i)] = u[i];
    return out;
}

TreeFunction random_tree_function(const TruncatedTree& tree, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> v(tree.node_count());
    for (double& x : v) x = dist(rng);
    return TreeFunction(tree, v);
}

}  // namespace

TEST_SUITE("operator") {

TEST_CASE("make_beta computes the weight ratio") {
    CHECK(make_beta(0.0).weight_ratio == 1.0);
    CHECK(make_beta(1.0 / 3.0).weight_ratio == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(make_beta(0.5).weight_ratio == 1.0);
    CHECK(make_beta(0.25).weight_ratio < 1.0);
    CHECK(make_beta(0.75).weight_ratio > 1.0);
    CHECK_THROWS_AS(make_beta(1.0), DomainError);
    CHECK_THROWS_AS(make_beta(-0.1), DomainError);
    CHECK_THROWS_AS(make_beta(std::nan("")), DomainError);
}

TEST_CASE("admissible depth tracks overflow of p^{-L} and p^L") {
    for (const double beta : {0.05, 0.1, 0.3, 0.45, 0.55, 0.9}) {
        const BetaWeight bw = make_beta(beta);
        const std::size_t d = max_admissible_depth(bw);
        CHECK(std::isfinite(std::pow(bw.weight_ratio, -static_cast<double>(d))));
        CHECK(std::isfinite(std::pow(bw.weight_ratio, static_cast<double>(d))));
        const double beyond = static_cast<double>(d + 1);
        CHECK_FALSE((std::isfinite(std::pow(bw.weight_ratio, -beyond)) && std::isfinite(std::pow(bw.weight_ratio, beyond))));
        CHECK_NOTHROW(require_admissible(bw, d));
        CHECK_THROWS_AS(require_admissible(bw, d + 1), ConfigError);
    }
    CHECK(max_admissible_depth(make_beta(0.1)) == 323);
    CHECK(max_admissible_depth(make_beta(0.4)) > 400);
    CHECK(max_admissible_depth(make_beta(0.0)) == std::numeric_limits<std::size_t>::max());
}

TEST_CASE("function types enforce their invariants") {
    CHECK_THROWS_AS(LevelFunction(std::vector<double>{}), DomainError);
    CHECK_THROWS_AS(LevelFunction(std::vector<double>{1.0, std::numeric_limits<double>::infinity()}), DomainError);
    const TruncatedTree tree(2, 2);
    CHECK_THROWS_AS(TreeFunction(tree, std::vector<double>(6, 0.0)), ShapeError);
    CHECK_THROWS_AS(TreeFunction(tree, std::vector<double>(7, std::nan(""))), DomainError);
    CHECK_THROWS_AS(embed(TruncatedTree(2, 3), LevelFunction(std::vector<double>(3, 1.0))), ShapeError);
}

TEST_CASE("constants are harmonic away from the truncation") {
    const BetaWeight bw = make_beta(0.3);
    const TruncatedTree tree(2, 3);
    const TreeFunction one(tree, std::vector<double>(tree.node_count(), 1.0));
    const TreeFunction lap = apply_laplacian(bw, one);
    for (std::size_t i = 0; i < tree.level_begin(3); ++i) CHECK(lap[i] == 0.0);
    const LevelFunction level = apply_laplacian(bw, LevelFunction(std::vector<double>(6, 1.0)));
    for (std::size_t k = 0; k < 5; ++k) CHECK(level[k] == 0.0);
    CHECK(level[5] == doctest::Approx(-(1.0 - 0.3) * std::pow(bw.weight_ratio, -5.0)).epsilon(1e-14));
}

TEST_CASE("root indicator on the binary tree with p = 1/2") {
    const BetaWeight bw = make_beta(1.0 / 3.0);
    const TruncatedTree tree(2, 3);
    TreeFunction u(tree);
    u[0] = 1.0;
    const TreeFunction lap = apply_laplacian(bw, u);
    CHECK(lap[0] == -1.0);
    CHECK(lap[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(lap[2] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    for (std::size_t i = 3; i < tree.node_count(); ++i) CHECK(lap[i] == 0.0);
}

TEST_CASE("geometric profiles are eigenfunctions at beta = 0") {
    const BetaWeight bw = make_beta(0.0);
    for (const double lambda : {0.25, 0.5, 1.0}) {
        const TruncatedTree tree(3, 4);
        std::vector<double> v(tree.node_count());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::pow(1.0 - lambda, static_cast<double>(tree.level_of(i)));
        const TreeFunction u(tree, v);
        const TreeFunction lap = apply_laplacian(bw, u);
        for (std::size_t i = 0; i < tree.level_begin(4); ++i) CHECK(std::abs(lap[i] + lambda * u[i]) <= 1e-15);
    }
}

TEST_CASE("tree Laplacian matches the path-based definition") {
    std::mt19937_64 rng(11);
    for (const std::uint32_t branching : {2u, 3u, 4u}) {
        for (const double beta : {0.0, 0.2, 0.5, 0.7}) {
            const TruncatedTree tree(branching, 4);
            const TreeFunction u = random_tree_function(tree, rng);
            const TreeFunction lap = apply_laplacian(make_beta(beta), u);
            const auto expected = oracle::laplacian(branching, 4, beta, as_map(u));
            for (std::size_t i = 0; i < tree.node_count(); ++i) {
                const double e = expected.at(tree.index_node(i));
                CHECK(lap[i] == doctest::Approx(e).epsilon(1e-13).scale(1.0));
            }
        }
    }
}

TEST_CASE("level Laplacian by hand") {
    const BetaWeight bw = make_beta(1.0 / 3.0);
    const LevelFunction u(std::vector<double>{1.0, 0.4, 0.0, 0.0});
    const LevelFunction v = apply_laplacian(bw, u);
    CHECK(v[0] == doctest::Approx(-0.6).epsilon(1e-15));
    CHECK(v[1] == doctest::Approx(-2.0 / 15.0).epsilon(1e-14));
}

TEST_CASE("level averages") {
    const TruncatedTree tree(2, 1);
    const TreeFunction u(tree, {1.0, 0.2, 0.6});
    const LevelFunction avg = level_average(u);
    CHECK(avg[0] == 1.0);
    CHECK(avg[1] == doctest::Approx(0.4).epsilon(1e-15));
    const LevelFunction w(std::vector<double>{3.0, -1.0, 0.5});
    const LevelFunction back = level_average(embed(TruncatedTree(3, 2), w));
    for (std::size_t k = 0; k < 3; ++k) CHECK(back[k] == w[k]);
    CHECK(is_level_constant(embed(TruncatedTree(3, 2), w)));
    CHECK_FALSE(is_level_constant(u));
}

TEST_CASE("level averaging commutes with the Laplacian") {
    std::mt19937_64 rng(5);
    for (const std::uint32_t branching : {2u, 3u}) {
        for (std::size_t depth = 0; depth <= 5; ++depth) {
            for (const double beta : {0.1, 1.0 / 3.0, 0.45}) {
                const BetaWeight bw = make_beta(beta);
                const TruncatedTree tree(branching, depth);
                const TreeFunction u = random_tree_function(tree, rng);
                const LevelFunction lhs = level_average(apply_laplacian(bw, u));
                const LevelFunction rhs = apply_laplacian(bw, level_average(u));
                for (std::size_t k = 0; k <= depth; ++k) CHECK(std::abs(lhs[k] - rhs[k]) <= 1e-12 * std::max(1.0, std::abs(rhs[k])));
            }
        }
    }
}

TEST_CASE("level Laplacian does not depend on m") {
    const BetaWeight bw = make_beta(0.3);
    const LevelFunction w(std::vector<double>{1.0, 0.7, 0.2, -0.4, 0.1});
    const LevelFunction direct = apply_laplacian(bw, w);
    for (std::uint32_t branching = 2; branching <= 5; ++branching) {
        const LevelFunction via_tree = level_average(apply_laplacian(bw, embed(TruncatedTree(branching, 4), w)));
        for (std::size_t k = 0; k <= 4; ++k) CHECK(via_tree[k] == doctest::Approx(direct[k]).epsilon(1e-13));
    }
}

TEST_CASE("Laplacian is linear") {
    std::mt19937_64 rng(17);
    const BetaWeight bw = make_beta(0.2);
    const TruncatedTree tree(3, 4);
    for (int trial = 0; trial < 20; ++trial) {
        const TreeFunction u = random_tree_function(tree, rng);
        const TreeFunction v = random_tree_function(tree, rng);
        const double a = 1.5;
        const double b = -0.25;
        std::vector<double> c(tree.node_count());
        for (std::size_t i = 0; i < c.size(); ++i) c[i] = a * u[i] + b * v[i];
        const TreeFunction lc = apply_laplacian(bw, TreeFunction(tree, c));
        const TreeFunction lu = apply_laplacian(bw, u);
        const TreeFunction lv = apply_laplacian(bw, v);
        for (std::size_t i = 0; i < c.size(); ++i) {
            const double scale = std::abs(a * lu[i]) + std::abs(b * lv[i]) + 1.0;
            CHECK(std::abs(lc[i] - (a * lu[i] + b * lv[i])) <= 1e-13 * scale);
        }
    }
}

TEST_CASE("nonnegative supersolutions decrease across levels") {
    // Delta v + lambda v <= 0 with v >= 0 forces v_{k+1} <= v_k.
    const BetaWeight bw = make_beta(0.4);
    const LevelFunction v(std::vector<double>{1.0, 0.8, 0.6, 0.4, 0.2});
    const LevelFunction lap = apply_laplacian(bw, v);
    const double lambda = 0.05;
    bool hypothesis = true;
    for (std::size_t k = 0; k <= 4; ++k) hypothesis = hypothesis && lap[k] + lambda * v[k] <= 0.0;
    REQUIRE(hypothesis);
    for (std::size_t k = 0; k < 4; ++k) CHECK(v[k + 1] <= v[k]);
}

TEST_CASE("residuals separate the deepest level") {
    const BetaWeight bw = make_beta(0.0);
    std::vector<double> g(11);
    for (std::size_t k = 0; k <= 10; ++k) g[k] = std::pow(0.5, static_cast<double>(k));
    const ResidualReport r = residual_sup(bw, 0.5, LevelFunction(g));
    CHECK(r.interior <= 1e-15);
    CHECK(r.deepest > 0.0);
    const ResidualReport zero = residual_sup(make_beta(0.3), 0.7, LevelFunction::zeros(5));
    CHECK(zero.interior == 0.0);
    CHECK(zero.deepest == 0.0);
    const TruncatedTree tree(2, 3);
    const ResidualReport tz = residual_sup(make_beta(0.3), 0.7, TreeFunction(tree));
    CHECK(tz.interior == 0.0);
}

}
