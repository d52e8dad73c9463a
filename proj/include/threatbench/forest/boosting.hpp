#pragma once

#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "threatbench/core/matrix.hpp"
#include "threatbench/core/rng.hpp"
#include "threatbench/forest/tree.hpp"

namespace threatbench::forest {

struct BoostingConfig {
    double learning_rate = 0.1;
    int max_rounds = 200;
    int max_depth = 6;
    double lambda = 1.0;          ///< L2 penalty on leaf weights
    double gamma = 0.0;           ///< minimum split gain
    double subsample = 0.8;       ///< row share drawn per round
    int early_stopping_rounds = 10;
    double min_child_weight = 1.0; ///< minimum hessian sum per child

    bool operator==(const BoostingConfig&) const = default;
};

/// Tracks validation loss and decides when boosting stops. Round 0 is the
/// constant base-score model.
class EarlyStopping {
public:
    explicit EarlyStopping(int patience) : patience_(patience) {}

    /// Records the loss after `round` trees; returns true when training should stop.
    bool update(int round, double loss);
    [[nodiscard]] int best_round() const { return best_round_; }
    [[nodiscard]] double best_loss() const { return best_loss_; }

private:
    int patience_;
    int best_round_ = -1;
    double best_loss_ = 0.0;
};

struct GradientBoostingModel {
    BoostingConfig config;
    std::size_t n_features = 0;
    double base_score = 0.0; ///< log-odds of the training prior
    int best_iteration = 0;  ///< trees used at prediction time
    std::vector<Tree> trees;
    std::vector<double> train_loss; ///< logloss after each round, index 0 = base score
    std::vector<double> valid_loss;

    /// base_score + η Σ_{t < best_iteration} tree_t(x)
    [[nodiscard]] double margin(std::span<const double> x) const;
    [[nodiscard]] std::vector<double> predict_margin(const Matrix& X) const;
    /// sigmoid(margin); P(class 0) is 1 minus this.
    [[nodiscard]] std::vector<double> predict_proba(const Matrix& X) const;

    [[nodiscard]] nlohmann::json to_json() const;
    static GradientBoostingModel from_json(const nlohmann::json& doc);
    bool operator==(const GradientBoostingModel&) const = default;
};

/// Second-order boosting on logistic loss: g = p - y, h = p(1 - p), leaf weight
/// -G/(H+λ), split gain ½[G_L²/(H_L+λ) + G_R²/(H_R+λ) - G²/(H+λ)] - γ with
/// non-positive gains refused. Stops once validation logloss has not improved
/// for early_stopping_rounds rounds and keeps the best prefix of trees.
GradientBoostingModel fit_gradient_boosting(const Matrix& X, std::span<const int> y,
                                            const BoostingConfig& config, const Matrix& X_valid,
                                            std::span<const int> y_valid, const RngStream& rng);

double sigmoid(double z);
double mean_logloss(std::span<const double> margins, std::span<const int> y);

} // namespace threatbench::forest
