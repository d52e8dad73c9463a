#include "threatbench/preprocess/session.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "threatbench/core/error.hpp"

namespace threatbench::preprocess {

SessionTensor SessionTensor::select(std::span<const std::size_t> which) const {
    SessionTensor out;
    out.sessions = which.size();
    out.time_steps = time_steps;
    out.features = features;
    out.feature_names = feature_names;
    const auto block = time_steps * features;
    out.data.reserve(which.size() * block);
    for (auto s : which) {
        if (s >= sessions) {
            throw DataError("SessionTensor::select: session index out of range");
        }
        out.data.insert(out.data.end(), data.begin() + static_cast<std::ptrdiff_t>(s * block),
                        data.begin() + static_cast<std::ptrdiff_t>((s + 1) * block));
        out.lengths.push_back(lengths[s]);
        out.labels.push_back(labels[s]);
        out.keys.push_back(keys[s]);
    }
    return out;
}

SessionTensor sessionize(const Dataset& events, const SessionizeOptions& options) {
    if (options.time_steps < 1) {
        throw ConfigError("sessionize: time_steps must be at least 1");
    }
    const auto users = events.numeric(options.user_column);
    const auto days = events.numeric(options.day_column);
    const auto labels = events.labels(options.label_column);

    std::vector<std::string> names;
    for (const auto& spec : events.schema()) {
        if (spec.kind == ColumnKind::categorical) {
            throw DataError("sessionize: categorical column '" + spec.name +
                            "' must be one-hot encoded first");
        }
        if (spec.name == options.user_column || spec.name == options.day_column ||
            spec.name == options.label_column) {
            continue;
        }
        names.push_back(spec.name);
    }
    const Matrix features = events.to_matrix(names);

    std::map<std::pair<int, int>, std::vector<std::size_t>> groups;
    for (std::size_t r = 0; r < events.rows(); ++r) {
        groups[{static_cast<int>(users[r]), static_cast<int>(days[r])}].push_back(r);
    }

    SessionTensor t;
    t.sessions = groups.size();
    t.time_steps = options.time_steps;
    t.features = names.size();
    t.feature_names = names;
    t.data.assign(t.sessions * t.time_steps * t.features, 0.0);
    std::size_t s = 0;
    for (const auto& [key, rows] : groups) {
        const auto len = std::min(rows.size(), t.time_steps);
        for (std::size_t step = 0; step < len; ++step) {
            const auto src = features.row(rows[step]);
            std::copy(src.begin(), src.end(), t.step(s, step).begin());
        }
        int label = 0;
        for (auto r : rows) label = std::max(label, labels[r]);
        t.lengths.push_back(len);
        t.labels.push_back(label);
        t.keys.push_back(key);
        ++s;
    }
    return t;
}

void write_session_tensor(const SessionTensor& tensor, std::ostream& out) {
    out << "session_tensor 1\n";
    out << tensor.sessions << ' ' << tensor.time_steps << ' ' << tensor.features << '\n';
    for (std::size_t f = 0; f < tensor.feature_names.size(); ++f) {
        out << (f ? "," : "") << tensor.feature_names[f];
    }
    out << '\n';
    for (std::size_t s = 0; s < tensor.sessions; ++s) {
        out << tensor.keys[s].first << ' ' << tensor.keys[s].second << ' ' << tensor.lengths[s]
            << ' ' << tensor.labels[s] << '\n';
    }
    for (std::size_t s = 0; s < tensor.sessions; ++s) {
        for (std::size_t t = 0; t < tensor.time_steps; ++t) {
            const auto values = tensor.step(s, t);
            for (std::size_t f = 0; f < values.size(); ++f) {
                out << (f ? " " : "") << format_double(values[f]);
            }
            out << '\n';
        }
    }
}

SessionTensor read_session_tensor(std::istream& in) {
    std::string magic;
    int version = 0;
    in >> magic >> version;
    if (magic != "session_tensor" || version != 1) {
        throw DataError("read_session_tensor: unsupported header");
    }
    SessionTensor t;
    in >> t.sessions >> t.time_steps >> t.features;
    std::string line;
    std::getline(in, line);
    std::getline(in, line);
    std::stringstream names(line);
    for (std::string name; std::getline(names, name, ',');) {
        t.feature_names.push_back(name);
    }
    if (t.feature_names.size() != t.features) {
        throw DataError("read_session_tensor: feature name count mismatch");
    }
    for (std::size_t s = 0; s < t.sessions; ++s) {
        int user = 0, day = 0, label = 0;
        std::size_t len = 0;
        if (!(in >> user >> day >> len >> label)) {
            throw DataError("read_session_tensor: truncated session table");
        }
        t.keys.emplace_back(user, day);
        t.lengths.push_back(len);
        t.labels.push_back(label);
    }
    t.data.resize(t.sessions * t.time_steps * t.features);
    for (auto& v : t.data) {
        std::string token;
        if (!(in >> token)) {
            throw DataError("read_session_tensor: truncated payload");
        }
        v = std::stod(token);
    }
    return t;
}

void save_session_tensor(const SessionTensor& tensor, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write session tensor '" + path.string() + "'");
    }
    write_session_tensor(tensor, out);
}

} // namespace threatbench::preprocess
