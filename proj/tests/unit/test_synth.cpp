#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "threatbench/core/error.hpp"
#include "threatbench/core/summary.hpp"
#include "threatbench/forest/random_forest.hpp"
#include "threatbench/synth/synth.hpp"

namespace tb = threatbench;
namespace synth = threatbench::synth;

namespace {

std::size_t count_equal(std::span<const double> values, double v) {
    return static_cast<std::size_t>(std::count(values.begin(), values.end(), v));
}

std::size_t positives(const tb::Dataset& d) {
    return count_equal(d.numeric(*d.label_column()), 1.0);
}

bool within(std::span<const double> values, double lo, double hi) {
    return std::all_of(values.begin(), values.end(), [&](double v) { return v >= lo && v <= hi; });
}

bool integral(std::span<const double> values) {
    return std::all_of(values.begin(), values.end(), [](double v) { return v == std::floor(v); });
}

std::string csv(const tb::Dataset& d) {
    std::ostringstream out;
    tb::write_dataset(d, out);
    return out.str();
}

synth::GeneratorConfig random_config(tb::RngStream& rng) {
    synth::GeneratorConfig c;
    c.n = 100 + rng.uniform_int(std::uint64_t{900});
    c.anomaly_rate = 0.01 + 0.45 * rng.uniform();
    c.seed = rng.next_u64();
    return c;
}

} // namespace

TEST_CASE("synth: exact anomaly counts") {
    synth::GeneratorConfig c;
    c.n = 20000;
    c.anomaly_rate = 0.05;
    CHECK(positives(synth::generate_network_flows(c).data) == 1000);
    c.n = 10000;
    c.anomaly_rate = 0.1;
    CHECK(positives(synth::generate_malware_corpus(c).data) == 1000);
    CHECK(positives(synth::generate_email_corpus(c).data) == 1000);

    tb::RngStream rng(9, "configs");
    for (int trial = 0; trial < 10; ++trial) {
        const auto cfg = random_config(rng);
        const auto expected = synth::exact_anomaly_count(cfg.n, cfg.anomaly_rate);
        CHECK(positives(synth::generate_network_flows(cfg).data) == expected);
        CHECK(positives(synth::generate_malware_corpus(cfg).data) == expected);
        CHECK(positives(synth::generate_email_corpus(cfg).data) == expected);
    }
}

TEST_CASE("synth: configuration errors") {
    synth::GeneratorConfig c;
    c.n = 99;
    CHECK_THROWS_AS(synth::generate_network_flows(c), tb::ConfigError);
    c.n = 1000;
    c.anomaly_rate = 0.5;
    CHECK_THROWS_AS(synth::generate_malware_corpus(c), tb::ConfigError);
    c.anomaly_rate = 0.0;
    CHECK_THROWS_AS(synth::generate_email_corpus(c), tb::ConfigError);
    synth::GeneratorConfig u;
    u.ueba.users = 0;
    CHECK_THROWS_AS(synth::generate_user_activity(u), tb::ConfigError);
}

TEST_CASE("synth: network flows stay in range") {
    tb::RngStream rng(1, "network-ranges");
    for (int trial = 0; trial < 10; ++trial) {
        const auto s = synth::generate_network_flows(random_config(rng));
        const auto& d = s.data;
        CHECK(d.schema() == synth::network_schema());
        CHECK(within(d.numeric("src_port"), 0, 65535));
        CHECK(within(d.numeric("dst_port"), 0, 65535));
        CHECK(within(d.numeric("bytes"), 0, 1e300));
        CHECK(within(d.numeric("duration"), 0, 1e300));
        CHECK(within(d.numeric("packet_count"), 1, 1e300));
        for (const auto& p : d.categorical("protocol")) {
            CHECK((p == "TCP" || p == "UDP" || p == "ICMP"));
        }
        const auto label = d.numeric("anomaly_label");
        for (std::size_t i = 0; i < d.rows(); ++i) {
            CHECK((label[i] == 1.0) == !s.pattern[i].empty());
        }
    }
}

TEST_CASE("synth: injected network patterns") {
    synth::GeneratorConfig c;
    c.n = 5000;
    c.anomaly_rate = 0.1;
    const auto s = synth::generate_network_flows(c);
    const auto& d = s.data;
    const auto bytes = d.numeric("bytes");
    const auto duration = d.numeric("duration");
    const auto packets = d.numeric("packet_count");
    const auto src = d.numeric("src_port");
    double clean_bytes_max = 0, clean_packets_max = 0;
    for (std::size_t i = 0; i < d.rows(); ++i) {
        if (s.pattern[i].empty()) {
            clean_bytes_max = std::max(clean_bytes_max, bytes[i]);
            clean_packets_max = std::max(clean_packets_max, packets[i]);
        }
    }
    std::set<double> scan_sources;
    std::map<std::string, int> seen;
    for (std::size_t i = 0; i < d.rows(); ++i) {
        const auto& p = s.pattern[i];
        if (p.empty()) continue;
        ++seen[p];
        if (p == "port_scan") {
            scan_sources.insert(src[i]);
            CHECK(bytes[i] <= 120);
        } else if (p == "half_open") {
            CHECK(duration[i] < 0.01);
            CHECK(packets[i] <= 2);
        } else {
            CHECK(p == "burst");
            CHECK(packets[i] >= 60);
        }
    }
    CHECK(seen.size() == 3);
    CHECK(scan_sources.size() <= 3);
}

TEST_CASE("synth: network protocol ordering") {
    synth::GeneratorConfig c;
    c.n = 20000;
    c.anomaly_rate = 0.05;
    const auto summary = tb::summarize_columns(synth::generate_network_flows(c).data);
    const auto& counts = summary[2].counts;
    CHECK(summary[2].name == "protocol");
    CHECK(counts.at("TCP") > counts.at("UDP"));
    CHECK(counts.at("UDP") > counts.at("ICMP"));
}

TEST_CASE("synth: malware corpus ranges and shape") {
    tb::RngStream rng(2, "malware-ranges");
    for (int trial = 0; trial < 10; ++trial) {
        const auto& d = synth::generate_malware_corpus(random_config(rng)).data;
        CHECK(d.schema() == synth::malware_schema());
        CHECK(within(d.numeric("entropy"), 0, 8));
        CHECK(within(d.numeric("opcode_NOP_ratio"), 0, 1));
        CHECK(within(d.numeric("opcode_JMP_ratio"), 0, 1));
        CHECK(within(d.numeric("num_imports"), 0, 1e300));
        CHECK(within(d.numeric("num_strings"), 0, 1e300));
        CHECK(within(d.numeric("section_count"), 1, 1e300));
        CHECK(within(d.numeric("packer_entropy_ratio"), 0, 1e300));
        CHECK(within(d.numeric("file_size"), 0, 1e300));
    }

    synth::GeneratorConfig c;
    const auto& d = synth::generate_malware_corpus(c).data;
    const auto label = d.numeric("label");
    CHECK(count_equal(label, 0) > count_equal(label, 1));
    const auto sig = d.numeric("has_digital_signature");
    CHECK(count_equal(sig, 0) > count_equal(sig, 1));
    const auto packed = d.numeric("is_packed");
    CHECK(count_equal(packed, 0) > count_equal(packed, 1));

    double benign = 0, malicious = 0;
    const auto entropy = d.numeric("entropy");
    for (std::size_t i = 0; i < d.rows(); ++i) (label[i] ? malicious : benign) += entropy[i];
    CHECK(malicious / count_equal(label, 1) > benign / count_equal(label, 0) + 1.0);
}

TEST_CASE("synth: email corpus ranges and shape") {
    tb::RngStream rng(3, "email-ranges");
    for (int trial = 0; trial < 10; ++trial) {
        const auto& d = synth::generate_email_corpus(random_config(rng)).data;
        CHECK(d.schema() == synth::email_schema());
        CHECK(within(d.numeric("hour_sent"), 0, 23));
        CHECK(integral(d.numeric("hour_sent")));
        CHECK(within(d.numeric("sender_reputation_score"), 0, 1));
        CHECK(within(d.numeric("num_links"), 0, 1e300));
        CHECK(within(d.numeric("num_domains"), 0, 1e300));
        CHECK(within(d.numeric("num_suspicious_words"), 0, 1e300));
    }

    synth::GeneratorConfig c;
    const auto& d = synth::generate_email_corpus(c).data;
    const auto label = d.numeric("label");
    const auto spf = d.numeric("has_spf_fail");
    std::size_t pass = 0, fail = 0;
    for (std::size_t i = 0; i < d.rows(); ++i) {
        if (label[i] == 0) (spf[i] ? fail : pass) += 1;
    }
    CHECK(pass > fail);

    // Chi-square goodness of fit against a uniform hour; 41.638 is the
    // 0.99 quantile of chi-square with 23 degrees of freedom.
    std::array<double, 24> counts{};
    for (double h : d.numeric("hour_sent")) counts[static_cast<std::size_t>(h)] += 1;
    const double expected = static_cast<double>(d.rows()) / 24.0;
    double chi2 = 0.0;
    for (double o : counts) chi2 += (o - expected) * (o - expected) / expected;
    CHECK(chi2 < 41.638);
}

TEST_CASE("synth: noiseless email classes are separable") {
    synth::GeneratorConfig c;
    c.n = 2000;
    c.email.noise_fraction = 0.0;
    const auto& d = synth::generate_email_corpus(c).data;
    const std::vector<std::string> cols{"has_spf_fail", "has_login_form", "sender_reputation_score"};
    const auto X = d.to_matrix(cols);
    const auto y = d.labels("label");
    const std::vector<double> weights(y.size(), 1.0);
    const auto tree = tb::forest::fit_gini_tree(X, y, weights, 1, 2, 3, tb::RngStream(1, "sep"));
    std::size_t correct = 0;
    for (std::size_t i = 0; i < X.rows(); ++i) correct += (tree.predict(X.row(i)) > 0.5) == (y[i] == 1);
    CHECK(correct == X.rows());
}

TEST_CASE("synth: user activity") {
    synth::GeneratorConfig c;
    c.anomaly_rate = 0.004;
    const auto a = synth::generate_user_activity(c);
    const auto& d = a.events;
    CHECK(d.schema() == synth::ueba_schema());
    CHECK(within(d.numeric("user_id"), 1, 100));
    CHECK(within(d.numeric("day"), 1, 30));
    CHECK(within(d.numeric("hour"), 0, 23));
    CHECK(within(d.numeric("weekday"), 0, 6));
    CHECK(within(d.numeric("failed_login_attempts"), 0, 1e300));
    CHECK(within(d.numeric("command_count"), 0, 1e300));
    CHECK(positives(d) == synth::exact_anomaly_count(d.rows(), 0.004));

    const auto sensitive = d.numeric("accessed_sensitive_file");
    CHECK(count_equal(sensitive, 1.0) / static_cast<double>(d.rows()) < 0.1);

    const auto user = d.numeric("user_id");
    const auto day = d.numeric("day");
    const auto hour = d.numeric("hour");
    const auto weekday = d.numeric("weekday");
    const auto label = d.numeric("anomaly_label");
    const auto failed = d.numeric("failed_login_attempts");
    std::set<std::pair<double, double>> keys;
    for (std::size_t i = 0; i < d.rows(); ++i) {
        keys.insert({user[i], day[i]});
        REQUIRE(weekday[i] == std::fmod(day[i] - 1, 7.0));
        const auto& profile = a.profiles[static_cast<std::size_t>(user[i]) - 1];
        CHECK(profile.in_baseline(static_cast<int>(hour[i])) == (label[i] == 0.0));
        if (a.pattern[i] == "failed_login_spike") CHECK(failed[i] >= 5);
        if (i > 0) {
            const auto prev = std::make_tuple(user[i - 1], day[i - 1], hour[i - 1]);
            REQUIRE(prev <= std::make_tuple(user[i], day[i], hour[i]));
        }
    }
    CHECK(keys.size() == 3000);
}

TEST_CASE("synth: baseline window") {
    synth::UserProfile p;
    p.work_start = 9;
    p.work_length = 8;
    CHECK(p.in_baseline(9));
    CHECK(p.in_baseline(16));
    CHECK_FALSE(p.in_baseline(17));
    CHECK_FALSE(p.in_baseline(3));
    p.work_start = 20;
    CHECK(p.in_baseline(2));
    CHECK_FALSE(p.in_baseline(4));
}

TEST_CASE("synth: seed determinism") {
    synth::GeneratorConfig c;
    c.n = 3000;
    CHECK(csv(synth::generate_network_flows(c).data) == csv(synth::generate_network_flows(c).data));
    CHECK(csv(synth::generate_malware_corpus(c).data) == csv(synth::generate_malware_corpus(c).data));
    CHECK(csv(synth::generate_email_corpus(c).data) == csv(synth::generate_email_corpus(c).data));
    auto other = c;
    other.seed = 43;
    CHECK(csv(synth::generate_email_corpus(c).data) != csv(synth::generate_email_corpus(other).data));

    c.ueba.users = 10;
    c.ueba.days = 5;
    c.anomaly_rate = 0.01;
    std::ostringstream a, b;
    synth::write_event_log(synth::generate_user_activity(c).events, a);
    synth::write_event_log(synth::generate_user_activity(c).events, b);
    CHECK(a.str() == b.str());
    CHECK(a.str().find("\"seq\":0") != std::string::npos);
}
