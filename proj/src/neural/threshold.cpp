#include "threatbench/neural/threshold.hpp"

#include <algorithm>

#include "threatbench/core/error.hpp"
#include "threatbench/core/quantile.hpp"

namespace threatbench::neural {

nlohmann::json AnomalyThreshold::to_json() const {
    return {{"value", value}, {"percentile", percentile}, {"sample_size", sample_size}};
}

AnomalyThreshold AnomalyThreshold::from_json(const nlohmann::json& doc) {
    return {doc.at("value").get<double>(), doc.at("percentile").get<double>(),
            doc.at("sample_size").get<std::size_t>()};
}

AnomalyThreshold calibrate_threshold(std::span<const double> errors, double percentile) {
    if (errors.empty()) throw DataError("threshold: no calibration errors");
    if (!(percentile > 0.0 && percentile < 100.0)) {
        throw ConfigError("threshold: percentile must be in (0, 100)");
    }
    std::vector<double> sorted(errors.begin(), errors.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t k = nearest_rank(percentile, sorted.size());
    return {sorted[k - 1], percentile, sorted.size()};
}

std::vector<int> detect_anomalies(std::span<const double> errors,
                                  const AnomalyThreshold& threshold) {
    std::vector<int> flags(errors.size());
    for (std::size_t i = 0; i < errors.size(); ++i) flags[i] = errors[i] > threshold.value ? 1 : 0;
    return flags;
}

} // namespace threatbench::neural
