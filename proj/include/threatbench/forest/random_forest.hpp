#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "threatbench/core/dataset.hpp"
#include "threatbench/core/exec.hpp"
#include "threatbench/core/matrix.hpp"
#include "threatbench/core/rng.hpp"
#include "threatbench/forest/tree.hpp"

namespace threatbench::forest {

struct ForestConfig {
    int n_trees = 100;
    int max_depth = 12;
    int min_samples_split = 2;
    /// Candidate features per node; 0 selects ceil(sqrt(d)).
    int features_per_split = 0;
    /// Draw a bootstrap sample per tree; off fits every tree on all rows.
    bool bootstrap = true;

    bool operator==(const ForestConfig&) const = default;
};

struct RandomForestModel {
    ForestConfig config;
    std::size_t n_features = 0;
    int features_per_split = 0;
    std::vector<int> classes{0, 1};
    std::vector<std::uint64_t> tree_seeds; ///< key of each tree's derived stream
    std::vector<Tree> trees;

    /// Mean over trees of the leaf class-1 share. P(class 0) is 1 minus this.
    [[nodiscard]] double predict_one(std::span<const double> x) const;
    [[nodiscard]] std::vector<double> predict_proba(const Matrix& X,
                                                    Exec exec = Exec::parallel) const;

    [[nodiscard]] nlohmann::json to_json() const;
    static RandomForestModel from_json(const nlohmann::json& doc);
    bool operator==(const RandomForestModel&) const = default;
};

/// Gini splits over a random subset of features per node, each tree on its own
/// bootstrap sample from rng.child("tree", index), so the fitted forest does
/// not depend on the parallel schedule.
RandomForestModel fit_random_forest(const Matrix& X, std::span<const int> y,
                                    const ForestConfig& config, const RngStream& rng,
                                    Exec exec = Exec::parallel);

/// Single Gini tree over the given row weights (0 excludes a row). Exposed for
/// split-quality tests.
Tree fit_gini_tree(const Matrix& X, std::span<const int> y, std::span<const double> weights,
                   int max_depth, int min_samples_split, int features_per_split, RngStream rng);

} // namespace threatbench::forest
