#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "threatbench/core/exec.hpp"
#include "threatbench/core/matrix.hpp"
#include "threatbench/core/rng.hpp"
#include "threatbench/forest/boosting.hpp"
#include "threatbench/forest/random_forest.hpp"
#include "threatbench/linear/logistic.hpp"

namespace threatbench::evalx {

enum class Metric { f1, auc, accuracy };

std::string to_string(Metric metric);
Metric metric_from_string(const std::string& name);

struct FeatureImportance {
    std::string feature;
    double importance = 0.0;
    double std = 0.0;

    bool operator==(const FeatureImportance&) const = default;
};

/// Global importances (permutation_importance) or one row's signed
/// contributions (linear_contributions, tree_path_attribution).
struct AttributionReport {
    std::vector<std::string> features;

    Metric metric = Metric::auc;
    double baseline_metric = 0.0;
    std::vector<double> importance;
    std::vector<double> importance_std; ///< population std over repeats

    double baseline = 0.0;
    std::vector<double> contributions;

    /// The k largest importances, ties broken by feature order.
    [[nodiscard]] std::vector<FeatureImportance> top(std::size_t k) const;

    bool operator==(const AttributionReport&) const = default;
};

/// Maps a feature matrix to one score per row (higher = more likely threat).
using ScoreFn = std::function<std::vector<double>(const Matrix&)>;

struct ImportanceOptions {
    Metric metric = Metric::auc;
    int repeats = 3;
    /// f1 and accuracy predict the threat class when score >= threshold
    /// (score > threshold with strict set).
    double decision_threshold = 0.5;
    bool strict = false;
};

/// Evaluates a metric for the given scores under the options' decision rule.
double evaluate_metric(std::span<const double> scores, std::span<const int> y,
                       const ImportanceOptions& options);

/// importance_j = metric(X) - mean_r metric(X with column j permuted). The
/// permutation of (j, r) comes from rng.child("feature", j).child("repeat", r),
/// so the result does not depend on exec. score_fn must be thread-safe.
AttributionReport permutation_importance(const ScoreFn& score_fn, const Matrix& X,
                                         std::span<const int> y,
                                         std::vector<std::string> feature_names,
                                         const ImportanceOptions& options, const RngStream& rng,
                                         Exec exec = Exec::parallel);

/// contribution_j = w_j x_j, baseline = b.
AttributionReport linear_contributions(const linear::LogisticModel& model,
                                       std::span<const double> x,
                                       std::vector<std::string> feature_names = {});

/// Path deltas: each split on x's path credits its feature with the change in
/// node value from parent to child. Baseline is the mean root value; the sum of
/// contributions and baseline equals predict_one(x).
AttributionReport tree_path_attribution(const forest::RandomForestModel& model,
                                        std::span<const double> x,
                                        std::vector<std::string> feature_names = {});

/// As above on the boosted margin: baseline = base_score + η Σ root values.
AttributionReport tree_path_attribution(const forest::GradientBoostingModel& model,
                                        std::span<const double> x,
                                        std::vector<std::string> feature_names = {});

nlohmann::json to_json(const FeatureImportance& item);
FeatureImportance importance_from_json(const nlohmann::json& doc);

} // namespace threatbench::evalx
