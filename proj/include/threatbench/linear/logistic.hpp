#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "threatbench/core/matrix.hpp"

namespace threatbench::linear {

struct LogisticModel {
    std::vector<double> weights;
    double bias = 0.0;
    std::array<double, 2> class_weights{1.0, 1.0};
    double l2 = 0.0;

    [[nodiscard]] double predict_logit(std::span<const double> x) const;
    [[nodiscard]] double predict_proba(std::span<const double> x) const;
    [[nodiscard]] std::vector<double> predict_proba(const Matrix& X) const;

    [[nodiscard]] nlohmann::json to_json() const;
    static LogisticModel from_json(const nlohmann::json& doc);
    bool operator==(const LogisticModel&) const = default;
};

struct LogisticConfig {
    double l2 = 1e-3;
    int epochs = 1000;
    double step_size = 0.5;
    /// Per-class sample weights; unset selects inverse class frequency.
    std::optional<std::array<double, 2>> class_weights;
};

struct LogisticFit {
    LogisticModel model;
    std::vector<double> loss; ///< objective before each completed epoch, then the final value
};

struct LossGradient {
    double loss = 0.0;
    std::vector<double> grad_w;
    double grad_b = 0.0;
};

/// Weighted, L2-regularized mean logloss
///   (1/n) Σ cw_i [log(1 + e^{m_i}) - y_i m_i] + (λ/2)|w|²
/// and its gradient (1/n) Σ cw_i (p_i - y_i) x_i + λ w. The bias is not penalized.
LossGradient logistic_loss_gradient(const Matrix& X, std::span<const int> y,
                                    std::span<const double> weights, double bias,
                                    const std::array<double, 2>& class_weights, double l2);

/// n / (2 n_c) for each class c.
std::array<double, 2> inverse_frequency_weights(std::span<const int> y);

/// Full-batch gradient descent from w = 0, b = 0. Stops after config.epochs or
/// when the gradient max-norm drops below 1e-6.
LogisticFit fit_logistic(const Matrix& X, std::span<const int> y, const LogisticConfig& config);

} // namespace threatbench::linear
