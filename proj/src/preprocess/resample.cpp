#include "threatbench/preprocess/resample.hpp"

#include <cmath>
#include <set>

#include "threatbench/core/error.hpp"

namespace threatbench::preprocess {

std::vector<std::size_t> downsample_indices(std::span<const int> labels,
                                            double target_majority_ratio, const RngStream& rng) {
    std::vector<std::size_t> zeros, ones;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == 0) {
            zeros.push_back(i);
        } else if (labels[i] == 1) {
            ones.push_back(i);
        } else {
            throw DataError("downsample_majority: labels must be binary");
        }
    }
    if (zeros.empty() || ones.empty()) {
        throw DataError("downsample_majority: both classes must be present");
    }
    const bool zero_major = zeros.size() >= ones.size();
    const auto& majority = zero_major ? zeros : ones;
    const auto& minority = zero_major ? ones : zeros;
    if (!(target_majority_ratio > 0.0)) {
        throw ConfigError("downsample_majority: ratio must be positive");
    }
    const auto keep = static_cast<std::size_t>(
        std::floor(target_majority_ratio * static_cast<double>(minority.size()) + 0.5));
    if (keep > majority.size()) {
        throw ConfigError("downsample_majority: ratio " + std::to_string(target_majority_ratio) +
                          " needs " + std::to_string(keep) + " majority rows but only " +
                          std::to_string(majority.size()) + " exist");
    }
    auto select = rng.child("majority");
    std::vector<std::size_t> out = minority;
    for (auto j : select.sample_without_replacement(majority.size(), keep)) {
        out.push_back(majority[j]);
    }
    auto order = rng.child("order");
    order.shuffle(out);
    return out;
}

Dataset downsample_majority(const Dataset& dataset, std::string_view label_column,
                            double target_majority_ratio, const RngStream& rng) {
    const auto labels = dataset.labels(label_column);
    const auto idx = downsample_indices(labels, target_majority_ratio, rng);
    return dataset.select_rows(idx);
}

} // namespace threatbench::preprocess
