#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "threatbench/core/dataset.hpp"
#include "threatbench/core/rng.hpp"

namespace threatbench::preprocess {

/// Row indices kept by downsample_majority, in output order.
std::vector<std::size_t> downsample_indices(std::span<const int> labels,
                                            double target_majority_ratio, const RngStream& rng);

/// Keeps every minority row and round(ratio * minority) majority rows chosen
/// uniformly without replacement, then shuffles the result. ratio is
/// majority:minority after resampling; 1.0 balances the classes.
Dataset downsample_majority(const Dataset& dataset, std::string_view label_column,
                            double target_majority_ratio, const RngStream& rng);

} // namespace threatbench::preprocess
