#include "threatbench/linear/logistic.hpp"

#include <algorithm>
#include <cmath>

#include "threatbench/core/error.hpp"
#include "threatbench/core/numeric.hpp"

namespace threatbench::linear {

namespace {

void check_inputs(const Matrix& X, std::span<const int> y) {
    if (X.rows() != y.size()) throw DataError("logistic: label count does not match rows");
    if (X.rows() == 0) throw DataError("logistic: no training rows");
    for (int v : y) {
        if (v != 0 && v != 1) throw DataError("logistic: labels must be 0 or 1");
    }
    for (double v : X.data()) {
        if (!std::isfinite(v)) throw DataError("logistic: non-finite feature value");
    }
}

double margin(std::span<const double> w, double b, std::span<const double> x) {
    double z = b;
    for (std::size_t j = 0; j < w.size(); ++j) z += w[j] * x[j];
    return z;
}

} // namespace

double LogisticModel::predict_logit(std::span<const double> x) const {
    if (x.size() != weights.size()) throw DataError("logistic: feature width mismatch");
    return margin(weights, bias, x);
}

double LogisticModel::predict_proba(std::span<const double> x) const {
    return logistic(predict_logit(x));
}

std::vector<double> LogisticModel::predict_proba(const Matrix& X) const {
    std::vector<double> out(X.rows());
    for (std::size_t r = 0; r < X.rows(); ++r) out[r] = predict_proba(X.row(r));
    return out;
}

nlohmann::json LogisticModel::to_json() const {
    return {{"model", "logistic"},
            {"format_version", 1},
            {"weights", weights},
            {"bias", bias},
            {"class_weights", class_weights},
            {"l2", l2}};
}

LogisticModel LogisticModel::from_json(const nlohmann::json& doc) {
    if (doc.value("model", "") != "logistic") throw DataError("not a logistic model");
    LogisticModel model;
    model.weights = doc.at("weights").get<std::vector<double>>();
    model.bias = doc.at("bias").get<double>();
    model.class_weights = doc.at("class_weights").get<std::array<double, 2>>();
    model.l2 = doc.at("l2").get<double>();
    return model;
}

LossGradient logistic_loss_gradient(const Matrix& X, std::span<const int> y,
                                    std::span<const double> weights, double bias,
                                    const std::array<double, 2>& class_weights, double l2) {
    const std::size_t n = X.rows();
    const std::size_t d = X.cols();
    LossGradient out;
    out.grad_w.assign(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto x = X.row(i);
        const double z = margin(weights, bias, x);
        const double cw = class_weights[static_cast<std::size_t>(y[i])];
        out.loss += cw * (softplus(z) - y[i] * z);
        const double r = cw * (logistic(z) - y[i]);
        for (std::size_t j = 0; j < d; ++j) out.grad_w[j] += r * x[j];
        out.grad_b += r;
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    double sq = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        out.grad_w[j] = out.grad_w[j] * inv_n + l2 * weights[j];
        sq += weights[j] * weights[j];
    }
    out.grad_b *= inv_n;
    out.loss = out.loss * inv_n + 0.5 * l2 * sq;
    return out;
}

std::array<double, 2> inverse_frequency_weights(std::span<const int> y) {
    std::array<double, 2> count{0.0, 0.0};
    for (int v : y) count[static_cast<std::size_t>(v)] += 1.0;
    if (count[0] == 0.0 || count[1] == 0.0) {
        throw DataError("logistic: labels need both classes");
    }
    const auto n = static_cast<double>(y.size());
    return {n / (2.0 * count[0]), n / (2.0 * count[1])};
}

LogisticFit fit_logistic(const Matrix& X, std::span<const int> y, const LogisticConfig& config) {
    check_inputs(X, y);
    if (config.epochs < 0) throw ConfigError("logistic: epochs must be non-negative");
    if (!(config.step_size > 0.0)) throw ConfigError("logistic: step_size must be positive");
    if (config.l2 < 0.0) throw ConfigError("logistic: l2 must be non-negative");

    const auto balanced = inverse_frequency_weights(y);
    LogisticFit fit;
    auto& model = fit.model;
    model.weights.assign(X.cols(), 0.0);
    model.class_weights = config.class_weights.value_or(balanced);
    model.l2 = config.l2;

    for (int epoch = 0;; ++epoch) {
        const auto lg = logistic_loss_gradient(X, y, model.weights, model.bias,
                                               model.class_weights, model.l2);
        if (!std::isfinite(lg.loss)) throw NumericError("logistic: non-finite loss");
        fit.loss.push_back(lg.loss);
        double max_norm = std::abs(lg.grad_b);
        for (double g : lg.grad_w) max_norm = std::max(max_norm, std::abs(g));
        if (epoch >= config.epochs || max_norm < 1e-6) break;
        for (std::size_t j = 0; j < model.weights.size(); ++j) {
            model.weights[j] -= config.step_size * lg.grad_w[j];
        }
        model.bias -= config.step_size * lg.grad_b;
    }
    return fit;
}

} // namespace threatbench::linear
