#include "threatbench/evalx/attribution.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "threatbench/core/error.hpp"
#include "threatbench/evalx/metrics.hpp"

namespace threatbench::evalx {

std::string to_string(Metric metric) {
    switch (metric) {
    case Metric::f1: return "f1";
    case Metric::auc: return "auc";
    case Metric::accuracy: return "accuracy";
    }
    return "auc";
}

Metric metric_from_string(const std::string& name) {
    if (name == "f1") return Metric::f1;
    if (name == "auc") return Metric::auc;
    if (name == "accuracy") return Metric::accuracy;
    throw ConfigError("unknown metric '" + name + "'");
}

std::vector<FeatureImportance> AttributionReport::top(std::size_t k) const {
    std::vector<std::size_t> order(importance.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return importance[a] > importance[b]; });
    order.resize(std::min(k, order.size()));
    std::vector<FeatureImportance> out;
    for (std::size_t j : order) {
        out.push_back({features.at(j), importance[j],
                       j < importance_std.size() ? importance_std[j] : 0.0});
    }
    return out;
}

double evaluate_metric(std::span<const double> scores, std::span<const int> y,
                       const ImportanceOptions& options) {
    if (options.metric == Metric::auc) return roc_auc(scores, y);
    std::vector<int> pred(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        pred[i] = options.strict ? scores[i] > options.decision_threshold
                                 : scores[i] >= options.decision_threshold;
    }
    const auto report = classification_report(confusion(y, pred));
    return options.metric == Metric::f1 ? report.positive.f1 : report.accuracy;
}

namespace {

std::vector<std::string> default_names(std::vector<std::string> names, std::size_t d) {
    if (names.empty()) {
        for (std::size_t j = 0; j < d; ++j) names.push_back("f" + std::to_string(j));
    }
    if (names.size() != d) throw DataError("attribution: feature name count mismatch");
    return names;
}

} // namespace

AttributionReport permutation_importance(const ScoreFn& score_fn, const Matrix& X,
                                         std::span<const int> y,
                                         std::vector<std::string> feature_names,
                                         const ImportanceOptions& options, const RngStream& rng,
                                         Exec exec) {
    if (options.repeats < 1) throw ConfigError("permutation importance: repeats must be >= 1");
    if (X.rows() != y.size()) throw DataError("permutation importance: label count mismatch");
    const std::size_t d = X.cols();
    AttributionReport report;
    report.features = default_names(std::move(feature_names), d);
    report.metric = options.metric;
    report.baseline_metric = evaluate_metric(score_fn(X), y, options);
    report.importance.assign(d, 0.0);
    report.importance_std.assign(d, 0.0);

    const auto repeats = static_cast<std::size_t>(options.repeats);
    for_each_index(exec, d, [&](std::size_t j) {
        const RngStream feature_rng = rng.child("feature", j);
        std::vector<double> drops(repeats);
        Matrix shuffled = X;
        for (std::size_t r = 0; r < repeats; ++r) {
            RngStream perm_rng = feature_rng.child("repeat", r);
            std::vector<std::size_t> perm(X.rows());
            std::iota(perm.begin(), perm.end(), 0);
            perm_rng.shuffle(perm);
            for (std::size_t i = 0; i < X.rows(); ++i) shuffled(i, j) = X(perm[i], j);
            drops[r] = report.baseline_metric - evaluate_metric(score_fn(shuffled), y, options);
        }
        double mean = 0.0;
        for (double v : drops) mean += v;
        mean /= static_cast<double>(repeats);
        double var = 0.0;
        for (double v : drops) var += (v - mean) * (v - mean);
        report.importance[j] = mean;
        report.importance_std[j] = std::sqrt(var / static_cast<double>(repeats));
    });
    return report;
}

AttributionReport linear_contributions(const linear::LogisticModel& model,
                                       std::span<const double> x,
                                       std::vector<std::string> feature_names) {
    if (x.size() != model.weights.size()) throw DataError("attribution: feature width mismatch");
    AttributionReport report;
    report.features = default_names(std::move(feature_names), x.size());
    report.baseline = model.bias;
    report.contributions.resize(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) report.contributions[j] = model.weights[j] * x[j];
    return report;
}

namespace {

/// Adds scale x (path deltas of one tree) into contributions; returns the root value.
double add_path(const forest::Tree& tree, std::span<const double> x, double scale,
                std::vector<double>& contributions) {
    if (tree.nodes.empty()) throw DataError("attribution: tree has no nodes");
    const auto path = tree.path(x);
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
        const auto& node = tree.nodes[static_cast<std::size_t>(path[k])];
        const auto& child = tree.nodes[static_cast<std::size_t>(path[k + 1])];
        contributions[static_cast<std::size_t>(node.feature)] += scale * (child.value - node.value);
    }
    return tree.nodes.front().value;
}

} // namespace

AttributionReport tree_path_attribution(const forest::RandomForestModel& model,
                                        std::span<const double> x,
                                        std::vector<std::string> feature_names) {
    if (model.trees.empty()) throw DataError("attribution: forest has no trees");
    if (x.size() != model.n_features) throw DataError("attribution: feature width mismatch");
    AttributionReport report;
    report.features = default_names(std::move(feature_names), x.size());
    report.contributions.assign(x.size(), 0.0);
    const double scale = 1.0 / static_cast<double>(model.trees.size());
    double root = 0.0;
    for (const auto& tree : model.trees) root += add_path(tree, x, scale, report.contributions);
    report.baseline = root * scale;
    return report;
}

AttributionReport tree_path_attribution(const forest::GradientBoostingModel& model,
                                        std::span<const double> x,
                                        std::vector<std::string> feature_names) {
    if (x.size() != model.n_features) throw DataError("attribution: feature width mismatch");
    AttributionReport report;
    report.features = default_names(std::move(feature_names), x.size());
    report.contributions.assign(x.size(), 0.0);
    const double eta = model.config.learning_rate;
    const auto used = std::min(model.trees.size(), static_cast<std::size_t>(model.best_iteration));
    double root = 0.0;
    for (std::size_t t = 0; t < used; ++t) root += add_path(model.trees[t], x, eta, report.contributions);
    report.baseline = model.base_score + eta * root;
    return report;
}

nlohmann::json to_json(const FeatureImportance& item) {
    return {{"feature", item.feature}, {"importance", item.importance}, {"std", item.std}};
}

FeatureImportance importance_from_json(const nlohmann::json& doc) {
    return {doc.at("feature").get<std::string>(), doc.at("importance").get<double>(),
            doc.at("std").get<double>()};
}

} // namespace threatbench::evalx
