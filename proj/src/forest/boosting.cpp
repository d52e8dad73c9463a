#include "threatbench/forest/boosting.hpp"

#include <algorithm>
#include <cmath>

#include "grow.hpp"
#include "threatbench/core/error.hpp"
#include "threatbench/core/numeric.hpp"

namespace threatbench::forest {

namespace {

struct GradientCriterion {
    struct Stats {
        double g = 0.0;
        double h = 0.0;
        double count = 0.0;
    };

    std::span<const double> grad;
    std::span<const double> hess;
    double lambda;
    double gamma;
    double min_child_weight;

    [[nodiscard]] double score(const Stats& s) const { return s.g * s.g / (s.h + lambda); }

    [[nodiscard]] Stats zero() const { return {}; }
    void add(Stats& s, std::size_t r) const {
        s.g += grad[r];
        s.h += hess[r];
        s.count += 1.0;
    }
    [[nodiscard]] Stats minus(const Stats& p, const Stats& l) const {
        return {p.g - l.g, p.h - l.h, p.count - l.count};
    }
    [[nodiscard]] bool splittable(const Stats& s, int) const { return s.count >= 2.0; }
    [[nodiscard]] bool child_ok(const Stats& s) const {
        return s.count >= 1.0 && s.h >= min_child_weight;
    }
    [[nodiscard]] double gain(const Stats& l, const Stats& r, const Stats& p) const {
        return 0.5 * (score(l) + score(r) - score(p)) - gamma;
    }
    [[nodiscard]] bool accept(double g) const { return g > 0.0; }
    [[nodiscard]] double value(const Stats& s) const {
        return s.h + lambda > 0.0 ? -s.g / (s.h + lambda) : 0.0;
    }
    [[nodiscard]] std::array<double, 2> summary(const Stats& s) const { return {s.g, s.h}; }
};

void check_inputs(const Matrix& X, std::span<const int> y, const char* what) {
    if (X.rows() != y.size()) {
        throw DataError(std::string("boosting: ") + what + " label count does not match rows");
    }
    for (int v : y) {
        if (v != 0 && v != 1) throw DataError("boosting: labels must be 0 or 1");
    }
}

} // namespace

double sigmoid(double z) { return logistic(z); }

double mean_logloss(std::span<const double> margins, std::span<const int> y) {
    if (margins.empty()) return 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < margins.size(); ++i) {
        const double z = margins[i];
        sum += softplus(z) - z * y[i];
    }
    return sum / static_cast<double>(margins.size());
}

bool EarlyStopping::update(int round, double loss) {
    if (best_round_ < 0 || loss < best_loss_) {
        best_round_ = round;
        best_loss_ = loss;
    }
    return round - best_round_ >= patience_;
}

GradientBoostingModel fit_gradient_boosting(const Matrix& X, std::span<const int> y,
                                            const BoostingConfig& config, const Matrix& X_valid,
                                            std::span<const int> y_valid, const RngStream& rng) {
    check_inputs(X, y, "training");
    check_inputs(X_valid, y_valid, "validation");
    if (X.rows() == 0) throw DataError("boosting: no training rows");
    if (X_valid.rows() == 0) throw DataError("boosting: empty validation set");
    if (X_valid.cols() != X.cols()) {
        throw DataError("boosting: validation feature width mismatch");
    }
    if (config.learning_rate <= 0.0) throw ConfigError("boosting: learning_rate must be positive");
    if (config.max_rounds < 0) throw ConfigError("boosting: max_rounds must be non-negative");
    if (config.lambda < 0.0) throw ConfigError("boosting: lambda must be non-negative");
    if (config.subsample <= 0.0 || config.subsample > 1.0) {
        throw ConfigError("boosting: subsample must be in (0, 1]");
    }
    if (config.early_stopping_rounds <= 0) {
        throw ConfigError("boosting: early_stopping_rounds must be positive");
    }

    const std::size_t n = X.rows();
    double positives = 0.0;
    for (int v : y) positives += v;
    const double prior = positives / static_cast<double>(n);
    if (prior <= 0.0 || prior >= 1.0) throw DataError("boosting: training labels need both classes");
    const auto valid_pos = std::count(y_valid.begin(), y_valid.end(), 1);
    if (valid_pos == 0 || static_cast<std::size_t>(valid_pos) == y_valid.size()) {
        throw DataError("boosting: validation labels need both classes");
    }

    GradientBoostingModel model;
    model.config = config;
    model.n_features = X.cols();
    model.base_score = std::log(prior / (1.0 - prior));

    std::vector<double> margin(n, model.base_score);
    std::vector<double> valid_margin(X_valid.rows(), model.base_score);
    std::vector<double> grad(n);
    std::vector<double> hess(n);
    const detail::Presorted sorted(X);

    EarlyStopping stopper(config.early_stopping_rounds);
    model.train_loss.push_back(mean_logloss(margin, y));
    model.valid_loss.push_back(mean_logloss(valid_margin, y_valid));
    stopper.update(0, model.valid_loss.back());

    const auto sample_size = static_cast<std::size_t>(
        std::max(1.0, std::floor(config.subsample * static_cast<double>(n) + 0.5)));
    std::vector<char> included(n, 1);
    auto no_mask = [](int) { return std::vector<char>{}; };

    for (int round = 1; round <= config.max_rounds; ++round) {
        for (std::size_t i = 0; i < n; ++i) {
            const double p = sigmoid(margin[i]);
            grad[i] = p - y[i];
            hess[i] = p * (1.0 - p);
        }
        if (sample_size < n) {
            std::fill(included.begin(), included.end(), 0);
            RngStream sub = rng.child("round", static_cast<std::uint64_t>(round));
            for (std::size_t r : sub.sample_without_replacement(n, sample_size)) included[r] = 1;
        }
        const GradientCriterion crit{grad, hess, config.lambda, config.gamma,
                                     config.min_child_weight};
        Tree tree = detail::grow_level_wise(X, sorted, included, crit, config.max_depth, no_mask);

        for (std::size_t i = 0; i < n; ++i) {
            margin[i] += config.learning_rate * tree.predict(X.row(i));
        }
        for (std::size_t i = 0; i < X_valid.rows(); ++i) {
            valid_margin[i] += config.learning_rate * tree.predict(X_valid.row(i));
        }
        for (double m : margin) {
            if (!std::isfinite(m)) throw NumericError("boosting: non-finite margin");
        }
        model.trees.push_back(std::move(tree));
        model.train_loss.push_back(mean_logloss(margin, y));
        model.valid_loss.push_back(mean_logloss(valid_margin, y_valid));
        if (stopper.update(round, model.valid_loss.back())) break;
    }

    model.best_iteration = stopper.best_round();
    model.trees.resize(static_cast<std::size_t>(model.best_iteration));
    return model;
}

double GradientBoostingModel::margin(std::span<const double> x) const {
    if (x.size() != n_features) throw DataError("boosting: feature width mismatch");
    double z = base_score;
    const auto used = std::min(trees.size(), static_cast<std::size_t>(best_iteration));
    for (std::size_t t = 0; t < used; ++t) z += config.learning_rate * trees[t].predict(x);
    return z;
}

std::vector<double> GradientBoostingModel::predict_margin(const Matrix& X) const {
    std::vector<double> out(X.rows());
    for (std::size_t r = 0; r < X.rows(); ++r) out[r] = margin(X.row(r));
    return out;
}

std::vector<double> GradientBoostingModel::predict_proba(const Matrix& X) const {
    auto out = predict_margin(X);
    for (double& v : out) v = sigmoid(v);
    return out;
}

nlohmann::json GradientBoostingModel::to_json() const {
    nlohmann::json doc;
    doc["model"] = "gradient_boosting";
    doc["format_version"] = 1;
    doc["config"] = {{"learning_rate", config.learning_rate},
                     {"max_rounds", config.max_rounds},
                     {"max_depth", config.max_depth},
                     {"lambda", config.lambda},
                     {"gamma", config.gamma},
                     {"subsample", config.subsample},
                     {"early_stopping_rounds", config.early_stopping_rounds},
                     {"min_child_weight", config.min_child_weight}};
    doc["n_features"] = n_features;
    doc["base_score"] = base_score;
    doc["best_iteration"] = best_iteration;
    doc["train_loss"] = train_loss;
    doc["valid_loss"] = valid_loss;
    auto& arr = doc["trees"] = nlohmann::json::array();
    for (const auto& tree : trees) arr.push_back(tree_to_json(tree));
    return doc;
}

GradientBoostingModel GradientBoostingModel::from_json(const nlohmann::json& doc) {
    if (doc.value("model", "") != "gradient_boosting") {
        throw DataError("not a gradient boosting model");
    }
    GradientBoostingModel model;
    const auto& cfg = doc.at("config");
    model.config.learning_rate = cfg.at("learning_rate").get<double>();
    model.config.max_rounds = cfg.at("max_rounds").get<int>();
    model.config.max_depth = cfg.at("max_depth").get<int>();
    model.config.lambda = cfg.at("lambda").get<double>();
    model.config.gamma = cfg.at("gamma").get<double>();
    model.config.subsample = cfg.at("subsample").get<double>();
    model.config.early_stopping_rounds = cfg.at("early_stopping_rounds").get<int>();
    model.config.min_child_weight = cfg.at("min_child_weight").get<double>();
    model.n_features = doc.at("n_features").get<std::size_t>();
    model.base_score = doc.at("base_score").get<double>();
    model.best_iteration = doc.at("best_iteration").get<int>();
    model.train_loss = doc.at("train_loss").get<std::vector<double>>();
    model.valid_loss = doc.at("valid_loss").get<std::vector<double>>();
    for (const auto& t : doc.at("trees")) model.trees.push_back(tree_from_json(t));
    return model;
}

} // namespace threatbench::forest
