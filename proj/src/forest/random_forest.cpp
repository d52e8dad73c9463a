#include "threatbench/forest/random_forest.hpp"

#include <algorithm>
#include <cmath>

#include "grow.hpp"
#include "threatbench/core/error.hpp"

namespace threatbench::forest {

namespace {

struct GiniCriterion {
    struct Stats {
        double w0 = 0.0;
        double w1 = 0.0;
    };

    std::span<const int> y;
    std::span<const double> w;
    double min_samples_split;

    static double impurity(const Stats& s) {
        const double total = s.w0 + s.w1;
        if (total <= 0.0) return 0.0;
        const double p = s.w1 / total;
        return 2.0 * p * (1.0 - p);
    }

    [[nodiscard]] Stats zero() const { return {}; }
    void add(Stats& s, std::size_t r) const { (y[r] ? s.w1 : s.w0) += w[r]; }
    [[nodiscard]] Stats minus(const Stats& p, const Stats& l) const {
        return {p.w0 - l.w0, p.w1 - l.w1};
    }
    [[nodiscard]] bool splittable(const Stats& s, int) const {
        return s.w0 > 0.0 && s.w1 > 0.0 && s.w0 + s.w1 >= min_samples_split;
    }
    [[nodiscard]] bool child_ok(const Stats& s) const { return s.w0 + s.w1 > 0.0; }
    [[nodiscard]] double gain(const Stats& l, const Stats& r, const Stats& p) const {
        const double wl = l.w0 + l.w1;
        const double wr = r.w0 + r.w1;
        return impurity(p) - (wl * impurity(l) + wr * impurity(r)) / (wl + wr);
    }
    [[nodiscard]] bool accept(double) const { return true; }
    [[nodiscard]] double value(const Stats& s) const {
        const double total = s.w0 + s.w1;
        return total > 0.0 ? s.w1 / total : 0.0;
    }
    [[nodiscard]] std::array<double, 2> summary(const Stats& s) const { return {s.w0, s.w1}; }
};

void check_labels(const Matrix& X, std::span<const int> y) {
    if (X.rows() != y.size()) {
        throw DataError("label count does not match feature rows");
    }
    for (int v : y) {
        if (v != 0 && v != 1) throw DataError("labels must be 0 or 1");
    }
}

Tree grow_gini(const Matrix& X, const detail::Presorted& sorted, std::span<const int> y,
               std::span<const double> weights, int max_depth, int min_samples_split,
               int features_per_split, RngStream rng) {
    const std::size_t d = X.cols();
    std::vector<char> included(X.rows());
    for (std::size_t r = 0; r < X.rows(); ++r) included[r] = weights[r] > 0.0 ? 1 : 0;

    const GiniCriterion crit{y, weights, static_cast<double>(min_samples_split)};
    const auto m = static_cast<std::size_t>(features_per_split);
    auto mask = [&](int) {
        std::vector<char> out;
        if (m == 0 || m >= d) return out;
        out.assign(d, 0);
        for (std::size_t f : rng.sample_without_replacement(d, m)) out[f] = 1;
        return out;
    };
    return detail::grow_level_wise(X, sorted, included, crit, max_depth, mask);
}

int resolve_features(int requested, std::size_t d) {
    if (requested > 0) return requested;
    return static_cast<int>(std::ceil(std::sqrt(static_cast<double>(d))));
}

} // namespace

Tree fit_gini_tree(const Matrix& X, std::span<const int> y, std::span<const double> weights,
                   int max_depth, int min_samples_split, int features_per_split, RngStream rng) {
    check_labels(X, y);
    if (weights.size() != X.rows()) throw DataError("weight count does not match feature rows");
    const detail::Presorted sorted(X);
    return grow_gini(X, sorted, y, weights, max_depth, min_samples_split, features_per_split,
                     std::move(rng));
}

RandomForestModel fit_random_forest(const Matrix& X, std::span<const int> y,
                                    const ForestConfig& config, const RngStream& rng, Exec exec) {
    check_labels(X, y);
    if (X.rows() < 2) throw DataError("random forest: need at least 2 training rows");
    const auto positives = std::count(y.begin(), y.end(), 1);
    if (positives == 0 || static_cast<std::size_t>(positives) == y.size()) {
        throw DataError("random forest: training labels need both classes");
    }
    if (config.n_trees <= 0) throw ConfigError("random forest: n_trees must be positive");
    if (config.max_depth < 0) throw ConfigError("random forest: max_depth must be non-negative");

    RandomForestModel model;
    model.config = config;
    model.n_features = X.cols();
    model.features_per_split = resolve_features(config.features_per_split, X.cols());

    const auto n_trees = static_cast<std::size_t>(config.n_trees);
    const detail::Presorted sorted(X);
    model.trees.resize(n_trees);
    model.tree_seeds.resize(n_trees);

    for_each_index(exec, n_trees, [&](std::size_t t) {
        RngStream tree_rng = rng.child("tree", t);
        model.tree_seeds[t] = tree_rng.key();
        std::vector<double> weights(X.rows(), 1.0);
        if (config.bootstrap) {
            std::fill(weights.begin(), weights.end(), 0.0);
            RngStream boot = tree_rng.child("bootstrap");
            for (std::size_t i = 0; i < X.rows(); ++i) weights[boot.uniform_int(X.rows())] += 1.0;
        }
        model.trees[t] = grow_gini(X, sorted, y, weights, config.max_depth,
                                   config.min_samples_split, model.features_per_split,
                                   tree_rng.child("features"));
    });
    return model;
}

double RandomForestModel::predict_one(std::span<const double> x) const {
    if (trees.empty()) throw DataError("random forest: model has no trees");
    if (x.size() != n_features) throw DataError("random forest: feature width mismatch");
    double sum = 0.0;
    for (const auto& tree : trees) sum += tree.predict(x);
    return sum / static_cast<double>(trees.size());
}

std::vector<double> RandomForestModel::predict_proba(const Matrix& X, Exec exec) const {
    std::vector<double> out(X.rows());
    for_each_index(exec, X.rows(), [&](std::size_t r) { out[r] = predict_one(X.row(r)); });
    return out;
}

nlohmann::json RandomForestModel::to_json() const {
    nlohmann::json doc;
    doc["model"] = "random_forest";
    doc["format_version"] = 1;
    doc["config"] = {{"n_trees", config.n_trees},
                     {"max_depth", config.max_depth},
                     {"min_samples_split", config.min_samples_split},
                     {"features_per_split", config.features_per_split},
                     {"bootstrap", config.bootstrap}};
    doc["n_features"] = n_features;
    doc["features_per_split"] = features_per_split;
    doc["classes"] = classes;
    doc["tree_seeds"] = tree_seeds;
    auto& arr = doc["trees"] = nlohmann::json::array();
    for (const auto& tree : trees) arr.push_back(tree_to_json(tree));
    return doc;
}

RandomForestModel RandomForestModel::from_json(const nlohmann::json& doc) {
    if (doc.value("model", "") != "random_forest") {
        throw DataError("not a random forest model");
    }
    RandomForestModel model;
    const auto& cfg = doc.at("config");
    model.config.n_trees = cfg.at("n_trees").get<int>();
    model.config.max_depth = cfg.at("max_depth").get<int>();
    model.config.min_samples_split = cfg.at("min_samples_split").get<int>();
    model.config.features_per_split = cfg.at("features_per_split").get<int>();
    model.config.bootstrap = cfg.at("bootstrap").get<bool>();
    model.n_features = doc.at("n_features").get<std::size_t>();
    model.features_per_split = doc.at("features_per_split").get<int>();
    model.classes = doc.at("classes").get<std::vector<int>>();
    model.tree_seeds = doc.at("tree_seeds").get<std::vector<std::uint64_t>>();
    for (const auto& t : doc.at("trees")) model.trees.push_back(tree_from_json(t));
    return model;
}

} // namespace threatbench::forest
