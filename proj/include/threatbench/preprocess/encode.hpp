#pragma once

#include <span>
#include <string>
#include <vector>

#include "threatbench/core/dataset.hpp"

namespace threatbench::preprocess {

struct EncodedColumn {
    std::string column;
    std::vector<std::string> categories; ///< lexicographic; categories[0] is dropped
    bool operator==(const EncodedColumn&) const = default;
};

/// Drop-first one-hot encoding fitted on a training table.
struct EncoderSpec {
    std::vector<EncodedColumn> columns;

    /// Σ (|categories| - 1) over encoded columns.
    [[nodiscard]] std::size_t output_width() const;
    bool operator==(const EncoderSpec&) const = default;
};

EncoderSpec fit_one_hot(const Dataset& dataset, std::span<const std::string> columns);

/// Replaces each encoded column, in place, with binary columns named
/// "<column>=<category>" for every category but the first. A category unseen
/// at fit time is a DataError naming the column and value.
Dataset apply_one_hot(const EncoderSpec& spec, const Dataset& dataset);

struct ScaledColumn {
    std::string column;
    double mean = 0.0;
    double std = 0.0; ///< population standard deviation
    bool constant = false;
    bool operator==(const ScaledColumn&) const = default;
};

struct ScalerSpec {
    std::vector<ScaledColumn> columns;
    bool operator==(const ScalerSpec&) const = default;
};

/// Population mean and std per numeric column. Fit on the training partition only.
ScalerSpec fit_scaler(const Dataset& dataset, std::span<const std::string> columns);

/// z = (x - mean) / std; constant columns map to zero.
Dataset apply_scaler(const ScalerSpec& spec, const Dataset& dataset);

} // namespace threatbench::preprocess
