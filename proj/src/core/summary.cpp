#include "threatbench/core/summary.hpp"

#include <algorithm>
#include <cmath>

#include "threatbench/core/error.hpp"
#include "threatbench/core/quantile.hpp"

namespace threatbench {
namespace {

NumericStats numeric_stats(std::span<const double> values) {
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const auto n = sorted.size();
    double sum = 0.0;
    for (double v : sorted) sum += v;
    const double mean = sum / static_cast<double>(n);
    double sq = 0.0;
    for (double v : sorted) sq += (v - mean) * (v - mean);

    auto q = [&](double percent) { return sorted[nearest_rank(percent, n) - 1]; };
    NumericStats s;
    s.mean = mean;
    s.std = std::sqrt(sq / static_cast<double>(n));
    s.min = sorted.front();
    s.q25 = q(25.0);
    s.median = q(50.0);
    s.q75 = q(75.0);
    s.max = sorted.back();
    return s;
}

} // namespace

std::vector<ColumnSummary> summarize_columns(const Dataset& dataset) {
    if (dataset.rows() == 0) {
        throw DataError("summarize_columns: dataset has no rows");
    }
    std::vector<ColumnSummary> out;
    for (std::size_t c = 0; c < dataset.cols(); ++c) {
        const auto& spec = dataset.column(c);
        ColumnSummary summary{spec.name, spec.kind, std::nullopt, {}};
        if (spec.kind == ColumnKind::numeric) {
            summary.stats = numeric_stats(dataset.numeric(c));
        } else {
            for (std::size_t r = 0; r < dataset.rows(); ++r) {
                ++summary.counts[dataset.cell_text(r, c)];
            }
        }
        out.push_back(std::move(summary));
    }
    return out;
}

std::vector<HistogramBin> histogram(std::span<const double> values, std::size_t bins) {
    if (bins == 0) {
        throw ConfigError("histogram: bins must be positive");
    }
    std::vector<HistogramBin> out(bins);
    if (values.empty()) {
        return out;
    }
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    const double width = (hi - lo) / static_cast<double>(bins);
    for (std::size_t b = 0; b < bins; ++b) {
        out[b].lower = lo + width * static_cast<double>(b);
        out[b].upper = b + 1 == bins ? hi : lo + width * static_cast<double>(b + 1);
    }
    for (double v : values) {
        std::size_t b = width > 0.0 ? static_cast<std::size_t>((v - lo) / width) : 0;
        b = std::min(b, bins - 1);
        ++out[b].count;
    }
    return out;
}

} // namespace threatbench
