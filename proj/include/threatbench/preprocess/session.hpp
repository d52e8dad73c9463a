#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "threatbench/core/dataset.hpp"

namespace threatbench::preprocess {

/// Padded sequence batch: data[s][t][f] stored row-major.
struct SessionTensor {
    std::size_t sessions = 0;
    std::size_t time_steps = 0;
    std::size_t features = 0;
    std::vector<double> data;
    std::vector<std::size_t> lengths;
    std::vector<int> labels;
    std::vector<std::string> feature_names;
    /// (user_id, day) of each session, for reporting.
    std::vector<std::pair<int, int>> keys;

    [[nodiscard]] std::span<const double> step(std::size_t s, std::size_t t) const {
        return {data.data() + (s * time_steps + t) * features, features};
    }
    std::span<double> step(std::size_t s, std::size_t t) {
        return {data.data() + (s * time_steps + t) * features, features};
    }
    [[nodiscard]] SessionTensor select(std::span<const std::size_t> sessions) const;

    bool operator==(const SessionTensor&) const = default;
};

struct SessionizeOptions {
    std::size_t time_steps = 50;
    std::string user_column = "user_id";
    std::string day_column = "day";
    std::string label_column = "anomaly_label";
};

/// One session per (user, day) with at least one event, ordered by key. Events
/// keep their input order; sessions longer than time_steps keep their first
/// time_steps events. Features are every numeric/binary column except the
/// user, day and label columns. Session label = max event label over the
/// whole session.
SessionTensor sessionize(const Dataset& events, const SessionizeOptions& options);

/// Text format:
///   session_tensor 1
///   <sessions> <time_steps> <features>
///   <feature names, comma separated>
///   one line per session: user day length label
///   one line per (session, step): features values, space separated
void write_session_tensor(const SessionTensor& tensor, std::ostream& out);
SessionTensor read_session_tensor(std::istream& in);
void save_session_tensor(const SessionTensor& tensor, const std::filesystem::path& path);

} // namespace threatbench::preprocess
