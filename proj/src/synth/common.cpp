#include "common.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>

#include <nlohmann/json.hpp>

#include "threatbench/core/error.hpp"

namespace threatbench::synth {

Schema network_schema() {
    return {{"src_port", ColumnKind::numeric},     {"dst_port", ColumnKind::numeric},
            {"protocol", ColumnKind::categorical}, {"bytes", ColumnKind::numeric},
            {"duration", ColumnKind::numeric},     {"packet_count", ColumnKind::numeric},
            {"is_internal", ColumnKind::binary},   {"anomaly_label", ColumnKind::label}};
}

Schema malware_schema() {
    return {{"file_size", ColumnKind::numeric},
            {"entropy", ColumnKind::numeric},
            {"num_imports", ColumnKind::numeric},
            {"num_strings", ColumnKind::numeric},
            {"opcode_NOP_ratio", ColumnKind::numeric},
            {"opcode_JMP_ratio", ColumnKind::numeric},
            {"has_digital_signature", ColumnKind::binary},
            {"section_count", ColumnKind::numeric},
            {"is_packed", ColumnKind::binary},
            {"packer_entropy_ratio", ColumnKind::numeric},
            {"file_type", ColumnKind::categorical},
            {"label", ColumnKind::label}};
}

Schema email_schema() {
    return {{"has_html", ColumnKind::binary},
            {"num_links", ColumnKind::numeric},
            {"num_domains", ColumnKind::numeric},
            {"has_spf_fail", ColumnKind::binary},
            {"is_from_internal", ColumnKind::binary},
            {"sender_reputation_score", ColumnKind::numeric},
            {"num_suspicious_words", ColumnKind::numeric},
            {"has_login_form", ColumnKind::binary},
            {"hour_sent", ColumnKind::numeric},
            {"attachment_type", ColumnKind::categorical},
            {"label", ColumnKind::label}};
}

Schema ueba_schema() {
    return {{"user_id", ColumnKind::numeric},
            {"day", ColumnKind::numeric},
            {"hour", ColumnKind::numeric},
            {"weekday", ColumnKind::numeric},
            {"activity_type", ColumnKind::categorical},
            {"failed_login_attempts", ColumnKind::numeric},
            {"command_count", ColumnKind::numeric},
            {"accessed_sensitive_file", ColumnKind::binary},
            {"is_admin_action", ColumnKind::binary},
            {"anomaly_label", ColumnKind::label}};
}

std::size_t exact_anomaly_count(std::size_t n, double rate) {
    return static_cast<std::size_t>(std::floor(static_cast<double>(n) * rate + 0.5));
}

namespace detail {

void validate_tabular(const GeneratorConfig& config, const char* who) {
    if (config.n < 100) {
        throw ConfigError(std::string(who) + ": n must be at least 100");
    }
    if (!(config.anomaly_rate > 0.0 && config.anomaly_rate < 0.5)) {
        throw ConfigError(std::string(who) + ": anomaly_rate must lie in (0, 0.5)");
    }
}

std::vector<char> choose_positive_rows(std::size_t n, double rate, const RngStream& rng) {
    auto stream = rng.child("positive-rows");
    std::vector<char> positive(n, 0);
    for (auto i : stream.sample_without_replacement(n, exact_anomaly_count(n, rate))) {
        positive[i] = 1;
    }
    return positive;
}

double clip(double v, double lo, double hi) {
    return std::clamp(v, lo, hi);
}

} // namespace detail

void write_event_log(const Dataset& events, std::ostream& out) {
    const auto& schema = events.schema();
    for (std::size_t r = 0; r < events.rows(); ++r) {
        nlohmann::ordered_json record;
        for (std::size_t c = 0; c < schema.size(); ++c) {
            if (schema[c].kind == ColumnKind::categorical) {
                record[schema[c].name] = events.categorical(c)[r];
            } else {
                const double v = events.numeric(c)[r];
                if (v == std::floor(v) && std::fabs(v) < 1e15) {
                    record[schema[c].name] = static_cast<std::int64_t>(v);
                } else {
                    record[schema[c].name] = v;
                }
            }
        }
        record["seq"] = r;
        out << record.dump() << '\n';
    }
}

void save_event_log(const Dataset& events, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write event log '" + path.string() + "'");
    }
    write_event_log(events, out);
}

} // namespace threatbench::synth
