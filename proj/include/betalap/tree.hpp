#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace betalap {

/// A vertex of the regular m-branching tree, identified by its digit path
/// from the root. The root is the empty path. Digits are only validated
/// against a branching factor where one is supplied.
class NodeId {
public:
    NodeId() = default;
    explicit NodeId(std::vector<std::uint32_t> digits) : digits_(std::move(digits)) {}

    static NodeId root() { return NodeId{}; }

    std::size_t level() const noexcept { return digits_.size(); }
    bool is_root() const noexcept { return digits_.empty(); }
    std::span<const std::uint32_t> digits() const noexcept { return digits_; }

    /// Drops the last digit. Throws DomainError at the root.
    NodeId parent() const;

    /// The m successors (path, i), i = 0..m-1 in ascending order.
    std::vector<NodeId> children(std::uint32_t branching) const;

    NodeId child(std::uint32_t digit) const;

    /// Dot-separated digits, "" for the root.
    std::string to_string() const;

    /// Inverse of to_string. Rejects empty components, non-digits and
    /// digits >= m.
    static NodeId parse(std::string_view text, std::uint32_t branching);

    friend auto operator<=>(const NodeId&, const NodeId&) = default;
    friend bool operator==(const NodeId&, const NodeId&) = default;

private:
    std::vector<std::uint32_t> digits_;
};

/// Exact value num/den of the boundary coordinate of a vertex.
struct Rational {
    std::uint64_t num = 0;
    std::uint64_t den = 1;

    double value() const noexcept { return static_cast<double>(num) / static_cast<double>(den); }
};

/// psi(x) = sum_k a_k / m^k as an exact fraction with denominator m^level.
/// Throws ConfigError when m^level does not fit in 64 bits.
Rational psi_exact(const NodeId& node, std::uint32_t branching);

/// psi(x) in double precision. Uses the exact fraction when it is
/// representable and Horner evaluation from the deepest digit otherwise.
double psi(const NodeId& node, std::uint32_t branching);

/// The tree truncated after level `depth`, with nodes numbered breadth-first
/// (digits ascending within a level). Level k occupies the contiguous index
/// range [level_begin(k), level_end(k)) and the rank of a node inside its
/// level is its path read as a base-m number.
class TruncatedTree {
public:
    TruncatedTree(std::uint32_t branching, std::size_t depth);

    std::uint32_t branching() const noexcept { return m_; }
    std::size_t depth() const noexcept { return depth_; }
    std::size_t node_count() const noexcept { return offsets_.back(); }

    std::size_t level_begin(std::size_t level) const { return offsets_.at(level); }
    std::size_t level_end(std::size_t level) const { return offsets_.at(level + 1); }
    std::size_t level_size(std::size_t level) const { return level_end(level) - level_begin(level); }

    std::size_t level_of(std::size_t index) const;
    std::size_t parent_index(std::size_t index) const;
    // Index of child 0; children are contiguous. Only valid below depth().
    std::size_t first_child_index(std::size_t index) const;

    std::size_t node_index(const NodeId& node) const;
    NodeId index_node(std::size_t index) const;

    bool contains(const NodeId& node) const noexcept;

    friend bool operator==(const TruncatedTree& a, const TruncatedTree& b) noexcept {
        return a.m_ == b.m_ && a.depth_ == b.depth_;
    }

private:
    std::uint32_t m_;
    std::size_t depth_;
    // offsets_[k] = first index on level k; offsets_[depth+1] = node count.
    std::vector<std::size_t> offsets_;
};

}  // namespace betalap
