#include "betalap/operator.hpp"

#include "betalap/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace betalap {

namespace {

void require_finite(std::span<const double> values, const char* what) {
    for (const double v : values) {
        if (!std::isfinite(v)) {
            throw DomainError(std::string(what) + " contains a non-finite value");
        }
    }
}

double sup_abs(std::span<const double> values) noexcept {
    double s = 0.0;
    for (const double v : values) s = std::max(s, std::abs(v));
    return s;
}

}  // namespace

BetaWeight make_beta(double beta) {
    if (!(beta >= 0.0 && beta < 1.0)) {
        throw DomainError("beta must lie in [0, 1), got " + std::to_string(beta));
    }
    return BetaWeight{beta, beta == 0.0 ? 1.0 : beta / (1.0 - beta)};
}

std::size_t max_admissible_depth(const BetaWeight& bw) {
    const double log_p = std::abs(std::log(bw.weight_ratio));
    if (log_p == 0.0) {
        return std::numeric_limits<std::size_t>::max();
    }
    auto depth = static_cast<std::size_t>(std::floor(std::log(std::numeric_limits<double>::max()) / log_p));
    const auto ok = [&bw](std::size_t d) {
        const double e = static_cast<double>(d);
        return std::isfinite(std::pow(bw.weight_ratio, e)) && std::isfinite(std::pow(bw.weight_ratio, -e));
    };
    while (depth > 0 && !ok(depth)) --depth;
    while (ok(depth + 1)) ++depth;
    return depth;
}

void require_admissible(const BetaWeight& bw, std::size_t depth) {
    const std::size_t max_depth = max_admissible_depth(bw);
    if (depth > max_depth) {
        throw ConfigError("depth " + std::to_string(depth) + " is not admissible for beta = " +
                          std::to_string(bw.beta) + ": p^{-L} overflows beyond L = " + std::to_string(max_depth));
    }
}

std::vector<double> inverse_power_table(const BetaWeight& bw, std::size_t depth) {
    require_admissible(bw, depth);
    std::vector<double> table(depth + 1);
    for (std::size_t k = 0; k <= depth; ++k) {
        table[k] = std::pow(bw.weight_ratio, -static_cast<double>(k));
    }
    return table;
}

std::vector<double> power_table(const BetaWeight& bw, std::size_t depth) {
    require_admissible(bw, depth);
    std::vector<double> table(depth + 1);
    for (std::size_t k = 0; k <= depth; ++k) {
        table[k] = std::pow(bw.weight_ratio, static_cast<double>(k));
    }
    return table;
}

LevelFunction::LevelFunction(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) {
        throw DomainError("a level function needs at least the root level");
    }
    require_finite(values_, "level function");
}

double LevelFunction::sup_norm() const noexcept { return sup_abs(values_); }

TreeFunction::TreeFunction(TruncatedTree tree) : tree_(std::move(tree)), values_(tree_.node_count(), 0.0) {}

TreeFunction::TreeFunction(TruncatedTree tree, std::vector<double> values)
    : tree_(std::move(tree)), values_(std::move(values)) {
    if (values_.size() != tree_.node_count()) {
        throw ShapeError("tree function has " + std::to_string(values_.size()) + " values for " +
                         std::to_string(tree_.node_count()) + " nodes");
    }
    require_finite(values_, "tree function");
}

double TreeFunction::sup_norm() const noexcept { return sup_abs(values_); }

double TreeFunction::min() const noexcept { return *std::min_element(values_.begin(), values_.end()); }

LevelFunction apply_laplacian(const BetaWeight& bw, const LevelFunction& u) {
    const std::size_t depth = u.depth();
    const auto scale = inverse_power_table(bw, depth);
    // Extended-precision accumulation: the bracket cancels to O(p^k) while
    // its terms are O(u_k), and the result is then scaled by p^{-k}.
    const long double beta = bw.beta;
    const long double one_minus_beta = 1.0L - beta;
    std::vector<double> v(depth + 1);
    v[0] = static_cast<double>(static_cast<long double>(u.at_or_ghost(1)) - u[0]);
    for (std::size_t k = 1; k <= depth; ++k) {
        const long double bracket = beta * u[k - 1] + one_minus_beta * u.at_or_ghost(k + 1) - u[k];
        v[k] = static_cast<double>(bracket * scale[k]);
    }
    return LevelFunction(std::move(v));
}

TreeFunction apply_laplacian(const BetaWeight& bw, const TreeFunction& u) {
    const TruncatedTree& tree = u.tree();
    const std::size_t depth = tree.depth();
    const std::uint32_t branching = tree.branching();
    const auto scale = inverse_power_table(bw, depth);
    const double inv_m = 1.0 / static_cast<double>(branching);

    std::vector<double> out(tree.node_count());
    for (std::size_t k = 0; k <= depth; ++k) {
        const std::size_t begin = tree.level_begin(k);
        const std::size_t end = tree.level_end(k);
        for (std::size_t i = begin; i < end; ++i) {
            double child_sum = 0.0;
            if (k < depth) {
                const std::size_t c0 = tree.level_begin(k + 1) + (i - begin) * branching;
                for (std::uint32_t c = 0; c < branching; ++c) child_sum += u[c0 + c];
            }
            if (k == 0) {
                out[i] = child_sum * inv_m - u[i];
            } else {
                const std::size_t parent = tree.level_begin(k - 1) + (i - begin) / branching;
                out[i] = (bw.beta * u[parent] + (1.0 - bw.beta) * inv_m * child_sum - u[i]) * scale[k];
            }
        }
    }
    return TreeFunction(tree, std::move(out));
}

LevelFunction level_average(const TreeFunction& u) {
    const TruncatedTree& tree = u.tree();
    std::vector<double> avg(tree.depth() + 1);
    for (std::size_t k = 0; k <= tree.depth(); ++k) {
        double sum = 0.0;
        for (std::size_t i = tree.level_begin(k); i < tree.level_end(k); ++i) sum += u[i];
        avg[k] = sum / static_cast<double>(tree.level_size(k));
    }
    return LevelFunction(std::move(avg));
}

TreeFunction embed(const TruncatedTree& tree, const LevelFunction& u) {
    if (u.depth() != tree.depth()) {
        throw ShapeError("level function depth " + std::to_string(u.depth()) + " does not match tree depth " +
                         std::to_string(tree.depth()));
    }
    std::vector<double> values(tree.node_count());
    for (std::size_t k = 0; k <= tree.depth(); ++k) {
        std::fill(values.begin() + static_cast<std::ptrdiff_t>(tree.level_begin(k)),
                  values.begin() + static_cast<std::ptrdiff_t>(tree.level_end(k)), u[k]);
    }
    return TreeFunction(tree, std::move(values));
}

bool is_level_constant(const TreeFunction& u) {
    const TruncatedTree& tree = u.tree();
    for (std::size_t k = 0; k <= tree.depth(); ++k) {
        const double first = u[tree.level_begin(k)];
        for (std::size_t i = tree.level_begin(k) + 1; i < tree.level_end(k); ++i) {
            if (u[i] != first) return false;
        }
    }
    return true;
}

ResidualReport residual_sup(const BetaWeight& bw, double lambda, const LevelFunction& u) {
    const LevelFunction lap = apply_laplacian(bw, u);
    ResidualReport r;
    for (std::size_t k = 0; k < u.depth(); ++k) {
        r.interior = std::max(r.interior, std::abs(lap[k] + lambda * u[k]));
    }
    r.deepest = std::abs(lap[u.depth()] + lambda * u[u.depth()]);
    return r;
}

ResidualReport residual_sup(const BetaWeight& bw, double lambda, const TreeFunction& u) {
    const TreeFunction lap = apply_laplacian(bw, u);
    const TruncatedTree& tree = u.tree();
    ResidualReport r;
    const std::size_t deepest_begin = tree.level_begin(tree.depth());
    for (std::size_t i = 0; i < tree.node_count(); ++i) {
        const double e = std::abs(lap[i] + lambda * u[i]);
        if (i < deepest_begin) {
            r.interior = std::max(r.interior, e);
        } else {
            r.deepest = std::max(r.deepest, e);
        }
    }
    return r;
}

}  // namespace betalap
