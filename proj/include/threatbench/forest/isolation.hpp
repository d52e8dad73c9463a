#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "threatbench/core/exec.hpp"
#include "threatbench/core/matrix.hpp"
#include "threatbench/core/rng.hpp"
#include "threatbench/forest/tree.hpp"

namespace threatbench::forest {

/// Exact harmonic number H(m) = Σ_{i=1..m} 1/i, H(0) = 0.
double harmonic(std::size_t m);

/// c(m) = 2 H(m-1) - 2(m-1)/m: mean unsuccessful-search path length in a
/// binary search tree of m keys. c(0) = c(1) = 0.
double average_path_length(std::size_t m);

struct IsolationForestModel {
    std::size_t n_features = 0;
    std::size_t psi = 0;
    int height_limit = 0;
    double normalizer = 0.0; ///< c(psi)
    std::vector<Tree> trees;

    /// Depth of the reached leaf plus c(leaf count), averaged over trees.
    [[nodiscard]] double mean_path_length(std::span<const double> x) const;
    /// 2^(-E[h(x)] / c(psi)); higher is more anomalous.
    [[nodiscard]] std::vector<double> score(const Matrix& X, Exec exec = Exec::parallel) const;

    [[nodiscard]] nlohmann::json to_json() const;
    static IsolationForestModel from_json(const nlohmann::json& doc);
    bool operator==(const IsolationForestModel&) const = default;
};

/// Each tree isolates a psi-row subsample with uniformly random split features
/// (among those not constant at the node) and thresholds uniform over the
/// node's range, up to height ceil(log2 psi).
IsolationForestModel fit_isolation_forest(const Matrix& X, int n_trees, std::size_t psi,
                                          const RngStream& rng, Exec exec = Exec::parallel);

/// Score from a mean path length; exposed so the formula can be tested directly.
double isolation_score(double mean_path, std::size_t psi);

} // namespace threatbench::forest
