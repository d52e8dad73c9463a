#include "threatbench/forest/isolation.hpp"

#include <algorithm>
#include <cmath>

#include "threatbench/core/error.hpp"

namespace threatbench::forest {

double harmonic(std::size_t m) {
    double sum = 0.0;
    for (std::size_t i = m; i >= 1; --i) sum += 1.0 / static_cast<double>(i);
    return sum;
}

double average_path_length(std::size_t m) {
    if (m <= 1) return 0.0;
    const auto md = static_cast<double>(m);
    return 2.0 * harmonic(m - 1) - 2.0 * (md - 1.0) / md;
}

double isolation_score(double mean_path, std::size_t psi) {
    const double c = average_path_length(psi);
    if (c <= 0.0) throw ConfigError("isolation forest: psi must be at least 2");
    return std::exp2(-mean_path / c);
}

namespace {

int build(const Matrix& X, std::vector<std::size_t>& rows, std::size_t begin, std::size_t end,
          int depth, int limit, RngStream& rng, Tree& tree) {
    const int idx = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    const std::size_t count = end - begin;
    auto leaf = [&] {
        auto& node = tree.nodes[static_cast<std::size_t>(idx)];
        node.value = static_cast<double>(count);
        node.stats = {static_cast<double>(count), 0.0};
        return idx;
    };
    if (depth >= limit || count <= 1) return leaf();

    std::vector<std::size_t> candidates;
    std::vector<double> lo(X.cols());
    std::vector<double> hi(X.cols());
    for (std::size_t f = 0; f < X.cols(); ++f) {
        lo[f] = hi[f] = X(rows[begin], f);
        for (std::size_t i = begin + 1; i < end; ++i) {
            lo[f] = std::min(lo[f], X(rows[i], f));
            hi[f] = std::max(hi[f], X(rows[i], f));
        }
        if (lo[f] < hi[f]) candidates.push_back(f);
    }
    if (candidates.empty()) return leaf();

    const std::size_t f = candidates[rng.uniform_int(candidates.size())];
    double threshold = rng.uniform(lo[f], hi[f]);
    if (threshold >= hi[f]) threshold = lo[f];

    const auto mid = static_cast<std::size_t>(
        std::stable_partition(rows.begin() + static_cast<std::ptrdiff_t>(begin),
                              rows.begin() + static_cast<std::ptrdiff_t>(end),
                              [&](std::size_t r) { return X(r, f) <= threshold; }) -
        rows.begin());

    const int left = build(X, rows, begin, mid, depth + 1, limit, rng, tree);
    const int right = build(X, rows, mid, end, depth + 1, limit, rng, tree);
    auto& node = tree.nodes[static_cast<std::size_t>(idx)];
    node.feature = static_cast<int>(f);
    node.threshold = threshold;
    node.left = left;
    node.right = right;
    node.value = static_cast<double>(count);
    node.stats = {static_cast<double>(count), 0.0};
    return idx;
}

} // namespace

IsolationForestModel fit_isolation_forest(const Matrix& X, int n_trees, std::size_t psi,
                                          const RngStream& rng, Exec exec) {
    if (n_trees <= 0) throw ConfigError("isolation forest: n_trees must be positive");
    if (psi < 2) throw ConfigError("isolation forest: psi must be at least 2");
    if (psi > X.rows()) throw ConfigError("isolation forest: psi exceeds the number of rows");

    IsolationForestModel model;
    model.n_features = X.cols();
    model.psi = psi;
    model.height_limit = static_cast<int>(std::ceil(std::log2(static_cast<double>(model.psi))));
    model.normalizer = average_path_length(model.psi);
    model.trees.resize(static_cast<std::size_t>(n_trees));

    for_each_index(exec, model.trees.size(), [&](std::size_t t) {
        RngStream tree_rng = rng.child("tree", t);
        auto rows = tree_rng.sample_without_replacement(X.rows(), model.psi);
        std::sort(rows.begin(), rows.end());
        build(X, rows, 0, rows.size(), 0, model.height_limit, tree_rng, model.trees[t]);
    });
    return model;
}

double IsolationForestModel::mean_path_length(std::span<const double> x) const {
    if (trees.empty()) throw DataError("isolation forest: model has no trees");
    if (x.size() != n_features) throw DataError("isolation forest: feature width mismatch");
    double sum = 0.0;
    for (const auto& tree : trees) {
        std::size_t idx = 0;
        int depth = 0;
        while (!tree.nodes[idx].is_leaf()) {
            const auto& node = tree.nodes[idx];
            idx = static_cast<std::size_t>(
                x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left
                                                                            : node.right);
            ++depth;
        }
        sum += depth + average_path_length(static_cast<std::size_t>(tree.nodes[idx].value));
    }
    return sum / static_cast<double>(trees.size());
}

std::vector<double> IsolationForestModel::score(const Matrix& X, Exec exec) const {
    std::vector<double> out(X.rows());
    for_each_index(exec, X.rows(), [&](std::size_t r) {
        out[r] = isolation_score(mean_path_length(X.row(r)), psi);
    });
    return out;
}

nlohmann::json IsolationForestModel::to_json() const {
    nlohmann::json doc;
    doc["model"] = "isolation_forest";
    doc["format_version"] = 1;
    doc["n_features"] = n_features;
    doc["psi"] = psi;
    doc["height_limit"] = height_limit;
    doc["normalizer"] = normalizer;
    auto& arr = doc["trees"] = nlohmann::json::array();
    for (const auto& tree : trees) arr.push_back(tree_to_json(tree));
    return doc;
}

IsolationForestModel IsolationForestModel::from_json(const nlohmann::json& doc) {
    if (doc.value("model", "") != "isolation_forest") {
        throw DataError("not an isolation forest model");
    }
    IsolationForestModel model;
    model.n_features = doc.at("n_features").get<std::size_t>();
    model.psi = doc.at("psi").get<std::size_t>();
    model.height_limit = doc.at("height_limit").get<int>();
    model.normalizer = doc.at("normalizer").get<double>();
    for (const auto& t : doc.at("trees")) model.trees.push_back(tree_from_json(t));
    return model;
}

} // namespace threatbench::forest
