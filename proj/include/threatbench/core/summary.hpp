#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "threatbench/core/dataset.hpp"

namespace threatbench {

struct NumericStats {
    double mean = 0.0;
    double std = 0.0; ///< population
    double min = 0.0;
    double q25 = 0.0;
    double median = 0.0;
    double q75 = 0.0;
    double max = 0.0;
    bool operator==(const NumericStats&) const = default;
};

struct ColumnSummary {
    std::string name;
    ColumnKind kind = ColumnKind::numeric;
    std::optional<NumericStats> stats;            ///< numeric columns
    std::map<std::string, std::size_t> counts;    ///< categorical, binary, label
    bool operator==(const ColumnSummary&) const = default;
};

/// One summary per column. Quantiles are nearest-rank order statistics.
std::vector<ColumnSummary> summarize_columns(const Dataset& dataset);

/// Equal-width histogram of a numeric column over [min, max].
struct HistogramBin {
    double lower = 0.0;
    double upper = 0.0;
    std::size_t count = 0;
};
std::vector<HistogramBin> histogram(std::span<const double> values, std::size_t bins);

} // namespace threatbench
