#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

namespace threatbench::forest {

/// Binary split node or leaf. Internal nodes send x left iff
/// x[feature] <= threshold. Every node carries the statistics it was grown
/// from so attributions can walk the path:
///   classification tree  value = class-1 share,  stats = (weight0, weight1)
///   boosted tree         value = -G / (H + λ),   stats = (G, H)
///   isolation tree       value = sample count,   stats = (count, 0)
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
    std::array<double, 2> stats{};

    [[nodiscard]] bool is_leaf() const { return feature < 0; }
    bool operator==(const TreeNode&) const = default;
};

class Tree {
public:
    std::vector<TreeNode> nodes; ///< nodes[0] is the root

    [[nodiscard]] const TreeNode& leaf_for(std::span<const double> x) const;
    [[nodiscard]] double predict(std::span<const double> x) const { return leaf_for(x).value; }
    /// Node indices from the root to the leaf reached by x.
    [[nodiscard]] std::vector<int> path(std::span<const double> x) const;
    [[nodiscard]] int depth() const;

    bool operator==(const Tree&) const = default;
};

/// Renumbers nodes in depth-first preorder, the order tree_from_json rebuilds.
Tree preorder(const Tree& tree);

/// Nested-record form: {"value", "stats", "feature", "threshold", "left", "right"}.
nlohmann::json tree_to_json(const Tree& tree);
Tree tree_from_json(const nlohmann::json& doc);

} // namespace threatbench::forest
