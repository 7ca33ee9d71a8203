#include "betalap/errors.hpp"
#include "betalap/tree.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <set>

using namespace betalap;

namespace {

NodeId path(std::initializer_list<std::uint32_t> digits) { return NodeId(std::vector<std::uint32_t>(digits)); }

}  // namespace

TEST_SUITE("tree") {

TEST_CASE("parent drops the last digit") {
    CHECK(path({0, 1}).parent() == path({0}));
    CHECK(path({2}).parent() == NodeId::root());
    CHECK(path({0, 1}).parent().level() == 1);
    CHECK_THROWS_AS(NodeId::root().parent(), DomainError);
}

TEST_CASE("children are listed in ascending digit order") {
    const auto root_children = NodeId::root().children(2);
    REQUIRE(root_children.size() == 2);
    CHECK(root_children[0] == path({0}));
    CHECK(root_children[1] == path({1}));
    const auto c = path({1}).children(3);
    REQUIRE(c.size() == 3);
    CHECK(c[0] == path({1, 0}));
    CHECK(c[1] == path({1, 1}));
    CHECK(c[2] == path({1, 2}));
    for (std::uint32_t branching = 2; branching <= 6; ++branching) CHECK(path({0, 0}).children(branching).size() == branching);
}

TEST_CASE("parent and children are dual") {
    for (std::uint32_t branching = 2; branching <= 4; ++branching) {
        for (const NodeId& x : oracle::enumerate(branching, 3)) {
            for (const NodeId& y : x.children(branching)) CHECK(y.parent() == x);
            if (!x.is_root()) {
                const auto siblings = x.parent().children(branching);
                CHECK(std::find(siblings.begin(), siblings.end(), x) != siblings.end());
            }
        }
    }
}

TEST_CASE("psi evaluates the boundary coordinate") {
    CHECK(psi(NodeId::root(), 2) == 0.0);
    CHECK(psi(path({1}), 2) == 0.5);
    const Rational r = psi_exact(path({2, 1}), 3);
    CHECK(r.num == 7);
    CHECK(r.den == 9);
    CHECK(psi(path({2, 1}), 3) == doctest::Approx(7.0 / 9.0).epsilon(1e-16));
    CHECK_THROWS_AS(psi_exact(path({3}), 3), DomainError);
}

TEST_CASE("psi falls back to floating point beyond 64-bit denominators") {
    const NodeId deep(std::vector<std::uint32_t>(70, 1));
    CHECK_THROWS_AS(psi_exact(deep, 2), ConfigError);
    CHECK(psi(deep, 2) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("psi is nondecreasing along each level") {
    for (std::uint32_t branching = 2; branching <= 4; ++branching) {
        const TruncatedTree tree(branching, 4);
        for (std::size_t k = 0; k <= tree.depth(); ++k) {
            for (std::size_t i = tree.level_begin(k) + 1; i < tree.level_end(k); ++i) {
                CHECK(psi(tree.index_node(i - 1), branching) <= psi(tree.index_node(i), branching));
            }
        }
    }
}

TEST_CASE("breadth-first indices on the m=2, L=2 tree") {
    const TruncatedTree tree(2, 2);
    CHECK(tree.node_count() == 7);
    CHECK(tree.node_index(NodeId::root()) == 0);
    CHECK(tree.node_index(path({1})) == 2);
    CHECK(tree.index_node(6) == path({1, 1}));
    CHECK_THROWS_AS(tree.index_node(7), BoundsError);
    CHECK_THROWS_AS(tree.node_index(path({0, 0, 0})), BoundsError);
}

TEST_CASE("indexing matches exhaustive enumeration") {
    for (std::uint32_t branching = 2; branching <= 5; ++branching) {
        for (std::size_t depth = 0; depth <= 6; ++depth) {
            const TruncatedTree tree(branching, depth);
            const auto nodes = oracle::enumerate(branching, depth);
            std::size_t expected = 0;
            std::size_t width = 1;
            for (std::size_t k = 0; k <= depth; ++k, width *= branching) expected += width;
            REQUIRE(tree.node_count() == expected);
            REQUIRE(nodes.size() == expected);
            for (std::size_t i = 0; i < nodes.size(); ++i) {
                REQUIRE(tree.index_node(i) == nodes[i]);
                REQUIRE(tree.node_index(nodes[i]) == i);
                if (i > 0) REQUIRE(tree.parent_index(i) < i);
            }
        }
    }
}

TEST_CASE("index helpers agree with paths") {
    const TruncatedTree tree(3, 4);
    for (std::size_t i = 1; i < tree.node_count(); ++i) {
        const NodeId x = tree.index_node(i);
        CHECK(tree.level_of(i) == x.level());
        CHECK(tree.parent_index(i) == tree.node_index(x.parent()));
        if (x.level() < tree.depth()) CHECK(tree.first_child_index(i) == tree.node_index(x.child(0)));
    }
    CHECK_THROWS_AS(tree.first_child_index(tree.node_count() - 1), BoundsError);
    CHECK_THROWS_AS(tree.parent_index(0), DomainError);
}

TEST_CASE("ordering is deterministic") {
    const TruncatedTree a(3, 3);
    const TruncatedTree b(3, 3);
    CHECK(a == b);
    for (std::size_t i = 0; i < a.node_count(); ++i) CHECK(a.index_node(i) == b.index_node(i));
}

TEST_CASE("path text format") {
    CHECK(NodeId::root().to_string().empty());
    CHECK(path({0, 1, 2}).to_string() == "0.1.2");
    CHECK(NodeId::parse("", 2) == NodeId::root());
    CHECK(NodeId::parse("0.1.2", 3) == path({0, 1, 2}));
    CHECK_THROWS_AS(NodeId::parse("0.1.2", 2), ParseError);
    CHECK_THROWS_AS(NodeId::parse("0..1", 2), ParseError);
    CHECK_THROWS_AS(NodeId::parse("a", 2), ParseError);
    CHECK_THROWS_AS(NodeId::parse("1.", 2), ParseError);
    for (const NodeId& x : oracle::enumerate(3, 3)) CHECK(NodeId::parse(x.to_string(), 3) == x);
}

TEST_CASE("invalid trees are rejected") {
    CHECK_THROWS_AS(TruncatedTree(1, 3), DomainError);
    CHECK_THROWS_AS(TruncatedTree(2, 200), ConfigError);
    CHECK(TruncatedTree(2, 0).node_count() == 1);
}

}
