#pragma once

// Independent reference implementations used only by the tests. They avoid
// the library's index arithmetic and chain algorithms: the tree is walked
// through NodeId paths and eigenvalues come from dense linear algebra.

#include "betalap/tree.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

namespace oracle {

using betalap::NodeId;

// All nodes of the depth-L tree, breadth-first with ascending digits,
// produced by repeatedly expanding children.
inline std::vector<NodeId> enumerate(std::uint32_t branching, std::size_t depth) {
    std::vector<NodeId> nodes{NodeId::root()};
    std::size_t begin = 0;
    for (std::size_t k = 0; k < depth; ++k) {
        const std::size_t end = nodes.size();
        for (std::size_t i = begin; i < end; ++i) {
            for (std::uint32_t d = 0; d < branching; ++d) {
                std::vector<std::uint32_t> digits(nodes[i].digits().begin(), nodes[i].digits().end());
                digits.push_back(d);
                nodes.emplace_back(std::move(digits));
            }
        }
        begin = end;
    }
    return nodes;
}

inline double parent_child_ratio(double beta) { return beta == 0.0 ? 1.0 : beta / (1.0 - beta); }

// Delta_beta u straight from the definition, on a map keyed by path.
inline std::map<NodeId, double> laplacian(std::uint32_t branching, std::size_t depth, double beta,
                                          const std::map<NodeId, double>& u) {
    const double weight_ratio = parent_child_ratio(beta);
    const auto value = [&](const NodeId& x) {
        if (x.level() > depth) return 0.0;
        return u.at(x);
    };
    std::map<NodeId, double> out;
    for (const auto& [x, ux] : u) {
        double children = 0.0;
        for (std::uint32_t d = 0; d < branching; ++d) {
            std::vector<std::uint32_t> digits(x.digits().begin(), x.digits().end());
            digits.push_back(d);
            children += value(NodeId(digits));
        }
        if (x.is_root()) {
            out[x] = children / branching - ux;
        } else {
            const NodeId parent(std::vector<std::uint32_t>(x.digits().begin(), x.digits().end() - 1));
            out[x] = (beta * value(parent) + (1.0 - beta) / branching * children - ux) *
                     std::pow(weight_ratio, -static_cast<double>(x.level()));
        }
    }
    return out;
}

// Smallest eigenvalue of -Delta_beta on a symmetrizable generator given by
// its row-scaled form K (rows multiplied by p^{|x|}), the row scales and the
// symmetrizing weights. Works on the inverse, whose largest eigenvalue is
// 1 / lambda_1: the direct matrix has entries up to p^{-L} and would swamp
// lambda_1 in absolute rounding.
inline double smallest_from_scaled(const Eigen::MatrixXd& scaled, const Eigen::VectorXd& row_scale,
                                   const Eigen::VectorXd& weight) {
    const Eigen::MatrixXd inverse = (-scaled).partialPivLu().inverse();
    // (-Delta)^{-1} = (-K)^{-1} diag(row_scale)
    Eigen::MatrixXd green = inverse * row_scale.asDiagonal();
    const Eigen::VectorXd root_w = weight.array().sqrt();
    Eigen::MatrixXd sym = root_w.asDiagonal() * green * root_w.cwiseInverse().asDiagonal();
    sym = 0.5 * (sym + sym.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym, Eigen::EigenvaluesOnly);
    return 1.0 / solver.eigenvalues().maxCoeff();
}

// Dense oracle for the (L+1)-level chain with ghost Dirichlet level.
inline double level_lambda1(double beta, std::size_t depth) {
    const double weight_ratio = parent_child_ratio(beta);
    const auto n = static_cast<Eigen::Index>(depth + 1);
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd scale(n);
    Eigen::VectorXd weight(n);
    k(0, 0) = -1.0;
    if (n > 1) k(0, 1) = 1.0;
    scale(0) = 1.0;
    weight(0) = 1.0 - beta;
    for (Eigen::Index i = 1; i < n; ++i) {
        k(i, i - 1) = beta;
        k(i, i) = -1.0;
        if (i + 1 < n) k(i, i + 1) = 1.0 - beta;
        scale(i) = std::pow(weight_ratio, static_cast<double>(i));
        weight(i) = 1.0;
    }
    return smallest_from_scaled(k, scale, weight);
}

// Dense oracle for the full tree with every node as an unknown.
inline double tree_lambda1(std::uint32_t branching, std::size_t depth, double beta) {
    const double weight_ratio = parent_child_ratio(beta);
    const std::vector<NodeId> nodes = enumerate(branching, depth);
    std::map<NodeId, Eigen::Index> index;
    for (std::size_t i = 0; i < nodes.size(); ++i) index[nodes[i]] = static_cast<Eigen::Index>(i);
    const auto n = static_cast<Eigen::Index>(nodes.size());
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd scale(n);
    Eigen::VectorXd weight(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const NodeId& x = nodes[static_cast<std::size_t>(i)];
        const double level = static_cast<double>(x.level());
        k(i, i) = -1.0;
        const double child_weight = x.is_root() ? 1.0 / branching : (1.0 - beta) / branching;
        if (x.level() < depth) {
            for (std::uint32_t d = 0; d < branching; ++d) {
                std::vector<std::uint32_t> digits(x.digits().begin(), x.digits().end());
                digits.push_back(d);
                k(i, index.at(NodeId(digits))) = child_weight;
            }
        }
        if (!x.is_root()) {
            const NodeId parent(std::vector<std::uint32_t>(x.digits().begin(), x.digits().end() - 1));
            k(i, index.at(parent)) = beta;
        }
        scale(i) = std::pow(weight_ratio, level);
        weight(i) = x.is_root() ? 1.0 - beta : std::pow(static_cast<double>(branching), -level);
    }
    return smallest_from_scaled(k, scale, weight);
}

// Level recurrence u_{k+1} = ((1 - lambda p^k) u_k - beta u_{k-1}) / (1 - beta)
// evaluated in long double, as an independent trace.
inline std::vector<long double> trace(double beta, double lambda, std::size_t count) {
    const long double b = beta;
    const long double weight_ratio = beta == 0.0 ? 1.0L : b / (1.0L - b);
    std::vector<long double> u{1.0L, 1.0L - lambda};
    for (std::size_t k = 1; u.size() < count; ++k) {
        u.push_back(((1.0L - lambda * std::pow(weight_ratio, static_cast<long double>(k))) * u[k] - b * u[k - 1]) / (1.0L - b));
    }
    return u;
}

}  // namespace oracle
