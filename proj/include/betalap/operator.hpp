#pragma once

#include "betalap/tree.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace betalap {

/// The parameter beta together with the parent/children weight ratio
/// p = beta / (1 - beta), with p = 1 at beta = 0.
struct BetaWeight {
    double beta = 0.0;
    double weight_ratio = 1.0;
};

/// Throws DomainError unless 0 <= beta < 1.
BetaWeight make_beta(double beta);

/// Largest depth L for which both p^L and p^{-L} are finite doubles.
std::size_t max_admissible_depth(const BetaWeight& bw);

/// Throws ConfigError if (beta, depth) is not admissible.
void require_admissible(const BetaWeight& bw, std::size_t depth);

/// p^{-k} for k = 0..depth. Throws ConfigError if any entry overflows.
std::vector<double> inverse_power_table(const BetaWeight& bw, std::size_t depth);

/// p^{k} for k = 0..depth.
std::vector<double> power_table(const BetaWeight& bw, std::size_t depth);

/// A function that is constant on each level: values u_0..u_L, with an
/// implicit zero on the ghost level L+1.
class LevelFunction {
public:
    LevelFunction() : values_(1, 0.0) {}
    explicit LevelFunction(std::vector<double> values);

    static LevelFunction zeros(std::size_t depth) { return LevelFunction(std::vector<double>(depth + 1, 0.0)); }

    std::size_t depth() const noexcept { return values_.size() - 1; }
    std::size_t size() const noexcept { return values_.size(); }

    double operator[](std::size_t k) const noexcept { return values_[k]; }
    double& operator[](std::size_t k) noexcept { return values_[k]; }
    // Value on level k, zero on the ghost level.
    double at_or_ghost(std::size_t k) const noexcept { return k < values_.size() ? values_[k] : 0.0; }

    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }

    double sup_norm() const noexcept;

private:
    std::vector<double> values_;
};

/// One value per node of a truncated tree, in the tree's breadth-first order.
/// Children of the deepest level are ghosts with value zero.
class TreeFunction {
public:
    explicit TreeFunction(TruncatedTree tree);
    TreeFunction(TruncatedTree tree, std::vector<double> values);

    const TruncatedTree& tree() const noexcept { return tree_; }
    std::size_t size() const noexcept { return values_.size(); }

    double operator[](std::size_t i) const noexcept { return values_[i]; }
    double& operator[](std::size_t i) noexcept { return values_[i]; }
    double at(const NodeId& node) const { return values_[tree_.node_index(node)]; }

    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }

    double sup_norm() const noexcept;
    double min() const noexcept;

private:
    TruncatedTree tree_;
    std::vector<double> values_;
};

/// Delta_beta on the level chain:
///   v_0 = u_1 - u_0,
///   v_k = (beta u_{k-1} + (1-beta) u_{k+1} - u_k) p^{-k},  1 <= k <= L,
/// with u_{L+1} = 0. Independent of the branching factor.
LevelFunction apply_laplacian(const BetaWeight& bw, const LevelFunction& u);

/// Delta_beta node by node on a truncated tree (ghost children read as 0).
TreeFunction apply_laplacian(const BetaWeight& bw, const TreeFunction& u);

/// Level means m^{-k} sum_{|y|=k} u(y).
LevelFunction level_average(const TreeFunction& u);

/// The tree function that takes the value u_k on every node of level k.
TreeFunction embed(const TruncatedTree& tree, const LevelFunction& u);

/// True if u is exactly constant on every level.
bool is_level_constant(const TreeFunction& u);

/// Sup-norm of Delta_beta u + lambda u. `interior` covers levels 0..L-1;
/// the deepest level, where the ghost truncation acts, is reported apart.
struct ResidualReport {
    double interior = 0.0;
    double deepest = 0.0;
};

ResidualReport residual_sup(const BetaWeight& bw, double lambda, const LevelFunction& u);
ResidualReport residual_sup(const BetaWeight& bw, double lambda, const TreeFunction& u);

}  // namespace betalap
