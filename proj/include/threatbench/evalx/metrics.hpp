#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

namespace threatbench::evalx {

/// Binary confusion counts; positive = the threat class.
struct ConfusionMatrix {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::size_t tn = 0;

    [[nodiscard]] std::size_t total() const { return tp + fp + fn + tn; }
    bool operator==(const ConfusionMatrix&) const = default;
};

ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred);

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;

    bool operator==(const ClassMetrics&) const = default;
};

struct MetricsReport {
    std::string positive_class = "threat";
    std::string negative_class = "benign";
    double accuracy = 0.0;
    ClassMetrics positive;
    ClassMetrics negative;
    double macro_f1 = 0.0;
    std::optional<double> roc_auc;
    ConfusionMatrix confusion;

    bool operator==(const MetricsReport&) const = default;
};

/// Harmonic mean 2PR/(P+R); 0 when P + R = 0.
double f1_score(double precision, double recall);

/// Zero-denominator precision and recall are 0.
MetricsReport classification_report(const ConfusionMatrix& cm,
                                    std::optional<double> roc_auc = std::nullopt,
                                    std::string positive_class = "threat",
                                    std::string negative_class = "benign");

/// Adds ROC-AUC when scores are given.
MetricsReport classification_report(std::span<const int> y_true, std::span<const int> y_pred,
                                    std::optional<std::span<const double>> scores,
                                    std::string positive_class = "threat",
                                    std::string negative_class = "benign");

/// Mann-Whitney AUC with midranks for tied scores.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

nlohmann::json to_json(const ConfusionMatrix& cm);
ConfusionMatrix confusion_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const MetricsReport& report);
MetricsReport metrics_from_json(const nlohmann::json& doc);

} // namespace threatbench::evalx
