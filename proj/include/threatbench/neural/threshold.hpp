#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

namespace threatbench::neural {

struct AnomalyThreshold {
    double value = 0.0;
    double percentile = 95.0;
    std::size_t sample_size = 0;

    [[nodiscard]] nlohmann::json to_json() const;
    static AnomalyThreshold from_json(const nlohmann::json& doc);
    bool operator==(const AnomalyThreshold&) const = default;
};

/// Nearest-rank order statistic: the ceil(p/100 n)-th smallest error.
AnomalyThreshold calibrate_threshold(std::span<const double> errors, double percentile);

/// 1 where error > threshold (strictly), else 0.
std::vector<int> detect_anomalies(std::span<const double> errors, const AnomalyThreshold& threshold);

} // namespace threatbench::neural
