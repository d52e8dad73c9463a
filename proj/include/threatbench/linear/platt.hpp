#pragma once

#include <span>
#include <vector>

#include <nlohmann/json.hpp>

namespace threatbench::linear {

/// Calibrated probability sigmoid(A s + B) for a raw score s.
struct CalibratorSpec {
    double A = 1.0;
    double B = 0.0;

    [[nodiscard]] double apply(double score) const;
    [[nodiscard]] std::vector<double> apply(std::span<const double> scores) const;

    [[nodiscard]] nlohmann::json to_json() const;
    static CalibratorSpec from_json(const nlohmann::json& doc);
    bool operator==(const CalibratorSpec&) const = default;
};

struct PlattConfig {
    int epochs = 20000;
    double step_size = 1.0;
};

/// Platt scaling with smoothed targets (N+ + 1)/(N+ + 2) and 1/(N- + 2).
/// Scores are standardized before descent and A, B mapped back afterwards.
CalibratorSpec fit_platt(std::span<const double> scores, std::span<const int> labels,
                         const PlattConfig& config = {});

} // namespace threatbench::linear
