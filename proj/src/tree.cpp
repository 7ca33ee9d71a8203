#include "betalap/tree.hpp"

#include "betalap/errors.hpp"

#include <algorithm>
#include <charconv>
#include <limits>

namespace betalap {

namespace {

bool mul_overflows(std::size_t a, std::size_t b, std::size_t& out) {
    return __builtin_mul_overflow(a, b, &out);
}

}  // namespace

NodeId NodeId::parent() const {
    if (is_root()) {
        throw DomainError("the root has no predecessor");
    }
    return NodeId(std::vector<std::uint32_t>(digits_.begin(), digits_.end() - 1));
}

NodeId NodeId::child(std::uint32_t digit) const {
    auto digits = digits_;
    digits.push_back(digit);
    return NodeId(std::move(digits));
}

std::vector<NodeId> NodeId::children(std::uint32_t branching) const {
    std::vector<NodeId> out;
    out.reserve(branching);
    for (std::uint32_t i = 0; i < branching; ++i) {
        out.push_back(child(i));
    }
    return out;
}

std::string NodeId::to_string() const {
    std::string out;
    for (std::size_t k = 0; k < digits_.size(); ++k) {
        if (k > 0) out.push_back('.');
        out += std::to_string(digits_[k]);
    }
    return out;
}

NodeId NodeId::parse(std::string_view text, std::uint32_t branching) {
    std::vector<std::uint32_t> digits;
    if (text.empty()) {
        return NodeId{};
    }
    std::size_t start = 0;
    while (true) {
        const std::size_t dot = text.find('.', start);
        const std::string_view part =
            text.substr(start, dot == std::string_view::npos ? std::string_view::npos : dot - start);
        std::uint32_t digit = 0;
        const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), digit);
        if (part.empty() || ec != std::errc{} || ptr != part.data() + part.size()) {
            throw ParseError("malformed node path '" + std::string(text) + "'");
        }
        if (digit >= branching) {
            throw ParseError("digit " + std::to_string(digit) + " in path '" + std::string(text) +
                             "' is not below m = " + std::to_string(branching));
        }
        digits.push_back(digit);
        if (dot == std::string_view::npos) break;
        start = dot + 1;
    }
    return NodeId(std::move(digits));
}

Rational psi_exact(const NodeId& node, std::uint32_t branching) {
    Rational r;
    for (const std::uint32_t a : node.digits()) {
        if (a >= branching) {
            throw DomainError("digit " + std::to_string(a) + " is not below m = " + std::to_string(branching));
        }
        std::uint64_t num = 0;
        std::uint64_t den = 0;
        if (__builtin_mul_overflow(r.num, std::uint64_t{branching}, &num) ||
            __builtin_add_overflow(num, std::uint64_t{a}, &num) ||
            __builtin_mul_overflow(r.den, std::uint64_t{branching}, &den)) {
            throw ConfigError("psi denominator m^level exceeds 64 bits");
        }
        r.num = num;
        r.den = den;
    }
    return r;
}

double psi(const NodeId& node, std::uint32_t branching) {
    try {
        return psi_exact(node, branching).value();
    } catch (const ConfigError&) {
    }
    const auto digits = node.digits();
    double acc = 0.0;
    for (auto it = digits.rbegin(); it != digits.rend(); ++it) {
        acc = (static_cast<double>(*it) + acc) / static_cast<double>(branching);
    }
    return acc;
}

TruncatedTree::TruncatedTree(std::uint32_t branching, std::size_t depth) : m_(branching), depth_(depth) {
    if (branching < 2) {
        throw DomainError("branching factor must be at least 2");
    }
    offsets_.reserve(depth + 2);
    offsets_.push_back(0);
    std::size_t width = 1;
    for (std::size_t k = 0; k <= depth; ++k) {
        std::size_t next = 0;
        if (__builtin_add_overflow(offsets_.back(), width, &next)) {
            throw ConfigError("tree with m = " + std::to_string(branching) + " and depth " + std::to_string(depth) +
                              " has too many nodes to index");
        }
        offsets_.push_back(next);
        if (k < depth && mul_overflows(width, branching, width)) {
            throw ConfigError("tree with m = " + std::to_string(branching) + " and depth " + std::to_string(depth) +
                              " has too many nodes to index");
        }
    }
}

std::size_t TruncatedTree::level_of(std::size_t index) const {
    if (index >= node_count()) {
        throw BoundsError("node index " + std::to_string(index) + " out of range");
    }
    const auto it = std::upper_bound(offsets_.begin(), offsets_.end(), index);
    return static_cast<std::size_t>(it - offsets_.begin()) - 1;
}

std::size_t TruncatedTree::parent_index(std::size_t index) const {
    const std::size_t k = level_of(index);
    if (k == 0) {
        throw DomainError("the root has no predecessor");
    }
    const std::size_t rank = index - offsets_[k];
    return offsets_[k - 1] + rank / m_;
}

std::size_t TruncatedTree::first_child_index(std::size_t index) const {
    const std::size_t k = level_of(index);
    if (k >= depth_) {
        throw BoundsError("nodes on the deepest level have only ghost children");
    }
    const std::size_t rank = index - offsets_[k];
    return offsets_[k + 1] + rank * m_;
}

bool TruncatedTree::contains(const NodeId& node) const noexcept {
    if (node.level() > depth_) return false;
    return std::all_of(node.digits().begin(), node.digits().end(), [this](std::uint32_t a) { return a < m_; });
}

std::size_t TruncatedTree::node_index(const NodeId& node) const {
    if (node.level() > depth_) {
        throw BoundsError("node '" + node.to_string() + "' is below the truncation depth " + std::to_string(depth_));
    }
    std::size_t rank = 0;
    for (const std::uint32_t a : node.digits()) {
        if (a >= m_) {
            throw BoundsError("digit " + std::to_string(a) + " is not below m = " + std::to_string(m_));
        }
        rank = rank * m_ + a;
    }
    return offsets_[node.level()] + rank;
}

NodeId TruncatedTree::index_node(std::size_t index) const {
    const std::size_t k = level_of(index);
    std::size_t rank = index - offsets_[k];
    std::vector<std::uint32_t> digits(k);
    for (std::size_t j = k; j-- > 0;) {
        digits[j] = static_cast<std::uint32_t>(rank % m_);
        rank /= m_;
    }
    return NodeId(std::move(digits));
}

}  // namespace betalap
