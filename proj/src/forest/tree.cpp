#include "threatbench/forest/tree.hpp"

#include <algorithm>
#include <functional>

#include "threatbench/core/error.hpp"

namespace threatbench::forest {

const TreeNode& Tree::leaf_for(std::span<const double> x) const {
    if (nodes.empty()) {
        throw DataError("Tree: empty tree");
    }
    std::size_t idx = 0;
    while (!nodes[idx].is_leaf()) {
        const auto& node = nodes[idx];
        idx = static_cast<std::size_t>(x[static_cast<std::size_t>(node.feature)] <= node.threshold
                                           ? node.left
                                           : node.right);
    }
    return nodes[idx];
}

std::vector<int> Tree::path(std::span<const double> x) const {
    std::vector<int> out;
    int idx = 0;
    while (true) {
        out.push_back(idx);
        const auto& node = nodes.at(static_cast<std::size_t>(idx));
        if (node.is_leaf()) break;
        idx = x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right;
    }
    return out;
}

int Tree::depth() const {
    std::function<int(int)> rec = [&](int idx) -> int {
        const auto& node = nodes.at(static_cast<std::size_t>(idx));
        if (node.is_leaf()) return 0;
        return 1 + std::max(rec(node.left), rec(node.right));
    };
    return nodes.empty() ? 0 : rec(0);
}

namespace {

nlohmann::json node_to_json(const Tree& tree, int idx) {
    const auto& node = tree.nodes.at(static_cast<std::size_t>(idx));
    nlohmann::json doc;
    doc["value"] = node.value;
    doc["stats"] = node.stats;
    if (!node.is_leaf()) {
        doc["feature"] = node.feature;
        doc["threshold"] = node.threshold;
        doc["left"] = node_to_json(tree, node.left);
        doc["right"] = node_to_json(tree, node.right);
    }
    return doc;
}

int node_from_json(const nlohmann::json& doc, Tree& tree) {
    const int idx = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    TreeNode node;
    node.value = doc.at("value").get<double>();
    node.stats = doc.at("stats").get<std::array<double, 2>>();
    if (doc.contains("feature")) {
        node.feature = doc.at("feature").get<int>();
        node.threshold = doc.at("threshold").get<double>();
        node.left = node_from_json(doc.at("left"), tree);
        node.right = node_from_json(doc.at("right"), tree);
    }
    tree.nodes[static_cast<std::size_t>(idx)] = node;
    return idx;
}

} // namespace

Tree preorder(const Tree& tree) {
    Tree out;
    if (tree.nodes.empty()) return out;
    out.nodes.reserve(tree.nodes.size());
    auto copy = [&](auto&& self, int src) -> int {
        const int idx = static_cast<int>(out.nodes.size());
        out.nodes.push_back(tree.nodes[static_cast<std::size_t>(src)]);
        const auto& node = tree.nodes[static_cast<std::size_t>(src)];
        if (!node.is_leaf()) {
            const int l = self(self, node.left);
            const int r = self(self, node.right);
            out.nodes[static_cast<std::size_t>(idx)].left = l;
            out.nodes[static_cast<std::size_t>(idx)].right = r;
        }
        return idx;
    };
    copy(copy, 0);
    return out;
}

nlohmann::json tree_to_json(const Tree& tree) {
    if (tree.nodes.empty()) {
        return nullptr;
    }
    return node_to_json(tree, 0);
}

Tree tree_from_json(const nlohmann::json& doc) {
    Tree tree;
    if (!doc.is_null()) {
        node_from_json(doc, tree);
    }
    return tree;
}

} // namespace threatbench::forest
