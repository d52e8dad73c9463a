#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "threatbench/core/dataset.hpp"
#include "threatbench/core/rng.hpp"

namespace threatbench {

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

/// Per class, round-half-up(count * test_fraction) rows go to test and the rest
/// to train. Selection within a class is a shuffle from rng.child("class=<c>").
/// Both index lists are returned in ascending order.
SplitIndices stratified_split_indices(std::span<const int> labels, double test_fraction,
                                      const RngStream& rng);

std::pair<Dataset, Dataset> stratified_split(const Dataset& dataset, std::string_view label_column,
                                             double test_fraction, const RngStream& rng);

} // namespace threatbench
