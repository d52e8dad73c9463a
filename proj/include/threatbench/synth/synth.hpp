#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "threatbench/core/dataset.hpp"
#include "threatbench/core/rng.hpp"

namespace threatbench::synth {

// Default distribution parameters. The figures these mimic are qualitative, so
// every value here is a tunable default rather than a measured fact.
//
//   network  protocol mix TCP/UDP/ICMP          0.70 / 0.25 / 0.05
//            bytes, duration                    log-normal (right-skewed)
//            packet_count                       normal, clipped >= 1
//            is_internal                        Bernoulli(0.8)
//   malware  entropy benign / malicious         normal(5.0 / 7.2, sd 0.6), clipped to [0, 8]
//            packer_entropy_ratio               log-normal
//   email    hour_sent                          uniform over 0..23
//            cross-class noise                  2% of each class
//   ueba     events per user-day                Poisson(40), 100 users x 30 days

struct NetworkParams {
    double tcp_share = 0.70;
    double udp_share = 0.25;
    double icmp_share = 0.05;
    double bytes_log_mean = 7.0;
    double bytes_log_sd = 1.0;
    double duration_log_mean = -1.0;
    double duration_log_sd = 1.0;
    double packets_mean = 20.0;
    double packets_sd = 5.0;
    double internal_rate = 0.8;
};

struct MalwareParams {
    double benign_entropy_mean = 5.0;
    double malicious_entropy_mean = 7.2;
    double entropy_sd = 0.6;
    double benign_signed_rate = 0.4;
    double malicious_signed_rate = 0.05;
    double benign_packed_rate = 0.08;
    double malicious_packed_rate = 0.75;
    /// Share of malicious files drawn close to the benign profile.
    double stealth_fraction = 0.2;
};

struct EmailParams {
    /// Share of each class given traits of the other class.
    double noise_fraction = 0.02;
};

struct UebaParams {
    int users = 100;
    int days = 30;
    double events_per_day = 40.0;
    /// Anomalous events injected into each chosen session.
    int anomalies_per_session = 4;
};

struct GeneratorConfig {
    std::size_t n = 10000;
    double anomaly_rate = 0.1;
    std::uint64_t seed = 42;
    NetworkParams network;
    MalwareParams malware;
    EmailParams email;
    UebaParams ueba;
};

/// A generated table plus the injection pattern behind each row ("" for clean
/// rows). Patterns are diagnostics only and are never emitted as features.
struct Synthetic {
    Dataset data;
    std::vector<std::string> pattern;
};

Schema network_schema();
Schema malware_schema();
Schema email_schema();
Schema ueba_schema();

/// round(n * rate), the exact positive count every generator produces.
std::size_t exact_anomaly_count(std::size_t n, double rate);

/// Port scans, half-open TCP connections and traffic bursts injected into
/// clean enterprise flows.
Synthetic generate_network_flows(const GeneratorConfig& config);

Synthetic generate_malware_corpus(const GeneratorConfig& config);

Synthetic generate_email_corpus(const GeneratorConfig& config);

/// Working-hour window of one synthetic user. Clean events fall inside it;
/// every anomalous event falls outside it.
struct UserProfile {
    int user_id = 0;
    int work_start = 9;   ///< first working hour
    int work_length = 8;  ///< hours; the window may wrap past midnight
    double command_mean = 5.0;
    std::vector<double> activity_weights; ///< login, file_access, command, privilege_use

    [[nodiscard]] bool in_baseline(int hour) const;
};

struct UserActivity {
    Dataset events;
    std::vector<std::string> pattern;
    std::vector<UserProfile> profiles;
};

/// Events ordered by (user_id, day, hour, tiebreak counter). config.n is
/// ignored; the volume comes from users x days x events_per_day.
UserActivity generate_user_activity(const GeneratorConfig& config);

/// Line-delimited JSON event log in the dataset's row order, one object per
/// event with a "seq" tiebreak counter.
void write_event_log(const Dataset& events, std::ostream& out);
void save_event_log(const Dataset& events, const std::filesystem::path& path);

} // namespace threatbench::synth
