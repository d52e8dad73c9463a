#include <array>
#include <cmath>

#include "common.hpp"
#include "threatbench/core/error.hpp"

namespace threatbench::synth {
namespace {

struct Flow {
    double src_port = 0, dst_port = 0;
    std::string protocol;
    double bytes = 0, duration = 0, packets = 1, internal = 0;
};

constexpr std::array<double, 7> kTcpPorts{80, 443, 22, 25, 3389, 8080, 3306};
const std::vector<double> kTcpWeights{0.30, 0.40, 0.08, 0.05, 0.05, 0.07, 0.05};
constexpr std::array<double, 3> kUdpPorts{53, 123, 161};
const std::vector<double> kUdpWeights{0.70, 0.20, 0.10};

double ephemeral_port(RngStream& rng) {
    return static_cast<double>(rng.uniform_int(1024, 65535));
}

Flow clean_flow(const NetworkParams& p, RngStream& rng) {
    Flow f;
    const auto proto = rng.categorical({p.tcp_share, p.udp_share, p.icmp_share});
    if (proto == 0) {
        f.protocol = "TCP";
        f.src_port = ephemeral_port(rng);
        f.dst_port = kTcpPorts[rng.categorical(kTcpWeights)];
    } else if (proto == 1) {
        f.protocol = "UDP";
        f.src_port = ephemeral_port(rng);
        f.dst_port = kUdpPorts[rng.categorical(kUdpWeights)];
    } else {
        f.protocol = "ICMP";
    }
    f.bytes = std::round(rng.lognormal(p.bytes_log_mean, p.bytes_log_sd));
    f.duration = rng.lognormal(p.duration_log_mean, p.duration_log_sd);
    f.packets = std::max(1.0, std::round(rng.normal(p.packets_mean, p.packets_sd)));
    f.internal = rng.bernoulli(p.internal_rate) ? 1.0 : 0.0;
    return f;
}

// One scanning source fans out across random destination ports with tiny payloads.
Flow port_scan(double source_port, RngStream& rng) {
    Flow f;
    f.protocol = "TCP";
    f.src_port = source_port;
    f.dst_port = static_cast<double>(rng.uniform_int(1, 65535));
    f.bytes = static_cast<double>(rng.uniform_int(40, 120));
    f.duration = rng.uniform(0.0, 0.05);
    f.packets = static_cast<double>(rng.uniform_int(1, 2));
    f.internal = rng.bernoulli(0.3) ? 1.0 : 0.0;
    return f;
}

Flow half_open(RngStream& rng) {
    Flow f;
    f.protocol = "TCP";
    f.src_port = ephemeral_port(rng);
    f.dst_port = kTcpPorts[rng.categorical(kTcpWeights)];
    f.bytes = static_cast<double>(rng.uniform_int(40, 80));
    f.duration = rng.uniform(0.0, 0.002);
    f.packets = static_cast<double>(rng.uniform_int(1, 2));
    f.internal = rng.bernoulli(0.5) ? 1.0 : 0.0;
    return f;
}

Flow burst(const NetworkParams& p, RngStream& rng) {
    Flow f;
    f.protocol = rng.bernoulli(0.7) ? "TCP" : "UDP";
    f.src_port = ephemeral_port(rng);
    f.dst_port = f.protocol == "TCP" ? kTcpPorts[rng.categorical(kTcpWeights)]
                                     : kUdpPorts[rng.categorical(kUdpWeights)];
    f.bytes = std::round(rng.lognormal(p.bytes_log_mean + 6.0, 0.5));
    f.duration = rng.lognormal(1.5, 0.5);
    f.packets = std::max(60.0, std::round(rng.normal(p.packets_mean * 7.5, 25.0)));
    f.internal = rng.bernoulli(0.4) ? 1.0 : 0.0;
    return f;
}

} // namespace

Synthetic generate_network_flows(const GeneratorConfig& config) {
    detail::validate_tabular(config, "generate_network_flows");
    const auto& p = config.network;
    if (p.tcp_share < 0 || p.udp_share < 0 || p.icmp_share < 0 ||
        p.tcp_share + p.udp_share + p.icmp_share <= 0) {
        throw ConfigError("generate_network_flows: protocol shares must be non-negative");
    }
    const RngStream root(config.seed, "network");
    const auto positive = detail::choose_positive_rows(config.n, config.anomaly_rate, root);

    auto campaign_rng = root.child("scan-sources");
    std::array<double, 3> scan_sources{};
    for (auto& s : scan_sources) s = ephemeral_port(campaign_rng);

    const std::size_t n = config.n;
    std::vector<double> src(n), dst(n), bytes(n), duration(n), packets(n), internal(n), label(n);
    std::vector<std::string> protocol(n), pattern(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto rng = root.child("row", i);
        Flow f;
        if (positive[i]) {
            switch (rng.uniform_int(3)) {
            case 0:
                f = port_scan(scan_sources[rng.uniform_int(scan_sources.size())], rng);
                pattern[i] = "port_scan";
                break;
            case 1:
                f = half_open(rng);
                pattern[i] = "half_open";
                break;
            default:
                f = burst(p, rng);
                pattern[i] = "burst";
                break;
            }
        } else {
            f = clean_flow(p, rng);
        }
        src[i] = f.src_port;
        dst[i] = f.dst_port;
        protocol[i] = f.protocol;
        bytes[i] = f.bytes;
        duration[i] = f.duration;
        packets[i] = f.packets;
        internal[i] = f.internal;
        label[i] = positive[i] ? 1.0 : 0.0;
    }

    Synthetic out;
    out.data.add_numeric({"src_port", ColumnKind::numeric}, std::move(src));
    out.data.add_numeric({"dst_port", ColumnKind::numeric}, std::move(dst));
    out.data.add_categorical("protocol", std::move(protocol));
    out.data.add_numeric({"bytes", ColumnKind::numeric}, std::move(bytes));
    out.data.add_numeric({"duration", ColumnKind::numeric}, std::move(duration));
    out.data.add_numeric({"packet_count", ColumnKind::numeric}, std::move(packets));
    out.data.add_numeric({"is_internal", ColumnKind::binary}, std::move(internal));
    out.data.add_numeric({"anomaly_label", ColumnKind::label}, std::move(label));
    out.pattern = std::move(pattern);
    return out;
}

} // namespace threatbench::synth
