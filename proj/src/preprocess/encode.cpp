#include "threatbench/preprocess/encode.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "threatbench/core/error.hpp"

namespace threatbench::preprocess {
namespace {

void copy_column(const Dataset& src, std::size_t c, Dataset& dst) {
    const auto& spec = src.column(c);
    if (spec.kind == ColumnKind::categorical) {
        const auto values = src.categorical(c);
        dst.add_categorical(spec.name, {values.begin(), values.end()});
    } else {
        const auto values = src.numeric(c);
        dst.add_numeric(spec, {values.begin(), values.end()});
    }
}

} // namespace

std::size_t EncoderSpec::output_width() const {
    std::size_t width = 0;
    for (const auto& c : columns) {
        width += c.categories.empty() ? 0 : c.categories.size() - 1;
    }
    return width;
}

EncoderSpec fit_one_hot(const Dataset& dataset, std::span<const std::string> columns) {
    EncoderSpec spec;
    for (const auto& name : columns) {
        const auto idx = dataset.require(name);
        if (dataset.column(idx).kind != ColumnKind::categorical) {
            throw DataError("fit_one_hot: column '" + name + "' is not categorical");
        }
        const auto values = dataset.categorical(idx);
        std::set<std::string> unique(values.begin(), values.end());
        spec.columns.push_back({name, {unique.begin(), unique.end()}});
    }
    return spec;
}

Dataset apply_one_hot(const EncoderSpec& spec, const Dataset& dataset) {
    Dataset out;
    for (std::size_t c = 0; c < dataset.cols(); ++c) {
        const auto& name = dataset.column(c).name;
        const auto it = std::find_if(spec.columns.begin(), spec.columns.end(),
                                     [&](const EncodedColumn& e) { return e.column == name; });
        if (it == spec.columns.end()) {
            copy_column(dataset, c, out);
            continue;
        }
        const auto values = dataset.categorical(c);
        const auto& cats = it->categories;
        std::vector<std::size_t> code(values.size());
        for (std::size_t r = 0; r < values.size(); ++r) {
            const auto pos = std::lower_bound(cats.begin(), cats.end(), values[r]);
            if (pos == cats.end() || *pos != values[r]) {
                throw DataError("apply_one_hot: column '" + name + "' has unseen category '" +
                                values[r] + "'");
            }
            code[r] = static_cast<std::size_t>(pos - cats.begin());
        }
        for (std::size_t k = 1; k < cats.size(); ++k) {
            std::vector<double> indicator(values.size());
            for (std::size_t r = 0; r < values.size(); ++r) {
                indicator[r] = code[r] == k ? 1.0 : 0.0;
            }
            out.add_numeric({name + "=" + cats[k], ColumnKind::binary}, std::move(indicator));
        }
    }
    for (const auto& e : spec.columns) {
        (void)dataset.require(e.column);
    }
    return out;
}

ScalerSpec fit_scaler(const Dataset& dataset, std::span<const std::string> columns) {
    ScalerSpec spec;
    for (const auto& name : columns) {
        const auto idx = dataset.require(name);
        const auto kind = dataset.column(idx).kind;
        if (kind == ColumnKind::categorical || kind == ColumnKind::label) {
            throw DataError("fit_scaler: column '" + name + "' is not numeric");
        }
        const auto values = dataset.numeric(idx);
        if (values.empty()) {
            throw DataError("fit_scaler: no rows");
        }
        double sum = 0.0;
        for (double v : values) sum += v;
        const double mean = sum / static_cast<double>(values.size());
        double sq = 0.0;
        for (double v : values) sq += (v - mean) * (v - mean);
        const double sd = std::sqrt(sq / static_cast<double>(values.size()));
        spec.columns.push_back({name, mean, sd, !(sd > 0.0)});
    }
    return spec;
}

Dataset apply_scaler(const ScalerSpec& spec, const Dataset& dataset) {
    Dataset out;
    for (std::size_t c = 0; c < dataset.cols(); ++c) {
        const auto& col = dataset.column(c);
        const auto it = std::find_if(spec.columns.begin(), spec.columns.end(),
                                     [&](const ScaledColumn& s) { return s.column == col.name; });
        if (it == spec.columns.end()) {
            copy_column(dataset, c, out);
            continue;
        }
        if (col.kind == ColumnKind::categorical || col.kind == ColumnKind::label) {
            throw DataError("apply_scaler: column '" + col.name + "' is not numeric");
        }
        const auto values = dataset.numeric(c);
        std::vector<double> scaled(values.size(), 0.0);
        if (!it->constant) {
            for (std::size_t r = 0; r < values.size(); ++r) {
                scaled[r] = (values[r] - it->mean) / it->std;
            }
        }
        // Scaled values are no longer 0/1, so binary inputs become numeric.
        out.add_numeric({col.name, ColumnKind::numeric}, std::move(scaled));
    }
    for (const auto& s : spec.columns) {
        (void)dataset.require(s.column);
    }
    return out;
}

} // namespace threatbench::preprocess
