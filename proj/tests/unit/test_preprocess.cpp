#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "threatbench/core/error.hpp"
#include "threatbench/preprocess/encode.hpp"
#include "threatbench/preprocess/resample.hpp"
#include "threatbench/preprocess/session.hpp"
#include "threatbench/preprocess/smote.hpp"
#include "threatbench/synth/synth.hpp"

namespace tb = threatbench;
namespace pp = threatbench::preprocess;
namespace synth = threatbench::synth;

namespace {

double mean_of(std::span<const double> v) {
    double s = 0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double pop_std(std::span<const double> v) {
    const double m = mean_of(v);
    double s = 0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size()));
}

// Distance from p to the segment [a, b].
double segment_distance(std::span<const double> p, std::span<const double> a,
                        std::span<const double> b) {
    double ab2 = 0, t = 0;
    for (std::size_t j = 0; j < p.size(); ++j) {
        ab2 += (b[j] - a[j]) * (b[j] - a[j]);
        t += (p[j] - a[j]) * (b[j] - a[j]);
    }
    t = ab2 > 0 ? std::clamp(t / ab2, 0.0, 1.0) : 0.0;
    double d2 = 0;
    for (std::size_t j = 0; j < p.size(); ++j) {
        const double q = a[j] + t * (b[j] - a[j]);
        d2 += (p[j] - q) * (p[j] - q);
    }
    return std::sqrt(d2);
}

tb::Dataset events_fixture(const std::vector<std::tuple<int, int, double, int>>& rows) {
    std::vector<double> user, day, value, label;
    for (const auto& [u, d, v, l] : rows) {
        user.push_back(u);
        day.push_back(d);
        value.push_back(v);
        label.push_back(l);
    }
    tb::Dataset e;
    e.add_numeric({"user_id", tb::ColumnKind::numeric}, user);
    e.add_numeric({"day", tb::ColumnKind::numeric}, day);
    e.add_numeric({"value", tb::ColumnKind::numeric}, value);
    e.add_numeric({"anomaly_label", tb::ColumnKind::label}, label);
    return e;
}

} // namespace

TEST_CASE("one-hot: drop-first encoding") {
    tb::Dataset d;
    d.add_categorical("protocol", {"UDP", "TCP", "ICMP", "TCP"});
    d.add_categorical("single", {"x", "x", "x", "x"});
    d.add_numeric({"bytes", tb::ColumnKind::numeric}, {1, 2, 3, 4});
    const std::vector<std::string> cols{"protocol", "single"};
    const auto spec = pp::fit_one_hot(d, cols);
    CHECK(spec.columns[0].categories == std::vector<std::string>{"ICMP", "TCP", "UDP"});
    CHECK(spec.output_width() == 2);

    const auto out = pp::apply_one_hot(spec, d);
    CHECK(out.cols() == 3);
    CHECK(out.find("single") == std::nullopt);
    const auto tcp = out.numeric("protocol=TCP");
    const auto udp = out.numeric("protocol=UDP");
    CHECK(tcp[2] == 0.0);
    CHECK(udp[2] == 0.0);
    CHECK(tcp[1] == 1.0);
    CHECK(udp[0] == 1.0);
    CHECK(out.column(0).name == "protocol=TCP");

    tb::Dataset unseen;
    unseen.add_categorical("protocol", {"TCP", "SCTP"});
    unseen.add_categorical("single", {"x", "x"});
    try {
        (void)pp::apply_one_hot(spec, unseen);
        FAIL("expected unseen category error");
    } catch (const tb::DataError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("protocol") != std::string::npos);
        CHECK(msg.find("SCTP") != std::string::npos);
    }
    const std::vector<std::string> numeric{"bytes"};
    CHECK_THROWS_AS(pp::fit_one_hot(d, numeric), tb::DataError);
}

TEST_CASE("one-hot: width equals sum of levels minus one") {
    synth::GeneratorConfig c;
    c.n = 2000;
    const auto& d = synth::generate_malware_corpus(c).data;
    const std::vector<std::string> cols{"file_type"};
    const auto spec = pp::fit_one_hot(d, cols);
    const auto out = pp::apply_one_hot(spec, d);
    CHECK(out.cols() == d.cols() - 1 + spec.output_width());
    CHECK(spec.output_width() == spec.columns[0].categories.size() - 1);
}

TEST_CASE("scaler: hand example and constants") {
    tb::Dataset d;
    d.add_numeric({"x", tb::ColumnKind::numeric}, {1, 2, 3});
    d.add_numeric({"c", tb::ColumnKind::numeric}, {5, 5, 5});
    const std::vector<std::string> cols{"x", "c"};
    const auto spec = pp::fit_scaler(d, cols);
    CHECK(spec.columns[1].constant);
    CHECK(spec.columns[0].std == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-15));
    const auto out = pp::apply_scaler(spec, d);
    const auto x = out.numeric("x");
    CHECK(x[0] == doctest::Approx(-1.224744871391589).epsilon(1e-12));
    CHECK(x[1] == 0.0);
    CHECK(x[2] == doctest::Approx(1.224744871391589).epsilon(1e-12));
    for (double v : out.numeric("c")) CHECK(v == 0.0);
}

TEST_CASE("scaler: train columns standardized, test columns not") {
    synth::GeneratorConfig c;
    c.n = 3000;
    const auto& d = synth::generate_network_flows(c).data;
    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < d.rows(); ++i) (i % 3 ? train : test).push_back(i);
    const auto tr = d.select_rows(train);
    const auto te = d.select_rows(test);
    const std::vector<std::string> cols{"src_port", "dst_port", "bytes", "duration", "packet_count"};
    const auto spec = pp::fit_scaler(tr, cols);
    const auto scaled = pp::apply_scaler(spec, tr);
    for (const auto& name : cols) {
        const auto v = scaled.numeric(name);
        CHECK(std::abs(mean_of(v)) <= 1e-9);
        CHECK(std::abs(pop_std(v) - 1.0) <= 1e-9);
    }
    CHECK(std::abs(mean_of(pp::apply_scaler(spec, te).numeric("bytes"))) > 1e-6);
}

TEST_CASE("smote: synthetic rows lie on parent-neighbour segments") {
    tb::RngStream rng(4, "smote-fixture");
    tb::Matrix minority(40, 5);
    for (double& v : minority.data()) v = rng.normal(0, 3);
    const auto res = pp::smote_oversample(minority, 5, 1000, tb::RngStream(1, "smote"));
    REQUIRE(res.samples.rows() == 1000);
    const auto nn = pp::nearest_neighbors(minority, 5);
    for (std::size_t i = 0; i < 1000; ++i) {
        const auto parent = res.parent[i];
        const auto neighbor = res.neighbor[i];
        CHECK(std::find(nn[parent].begin(), nn[parent].end(), neighbor) != nn[parent].end());
        CHECK(res.step[i] >= 0.0);
        CHECK(res.step[i] < 1.0);
        CHECK(segment_distance(res.samples.row(i), minority.row(parent), minority.row(neighbor)) <= 1e-9);
    }
}

TEST_CASE("smote: degenerate inputs") {
    const tb::Matrix same(6, 3, 2.5);
    const auto res = pp::smote_oversample(same, 5, 50, tb::RngStream(1, "s"));
    for (double v : res.samples.data()) CHECK(v == 2.5);
    CHECK(pp::smote_oversample(same, 5, 0, tb::RngStream(1, "s")).samples.rows() == 0);
    CHECK_THROWS_AS(pp::smote_oversample(tb::Matrix(3, 2), 5, 10, tb::RngStream(1, "s")),
                    tb::DataError);
}

TEST_CASE("nearest neighbours: serial and parallel agree, ties by index") {
    tb::Matrix grid(6, 1);
    for (std::size_t i = 0; i < 6; ++i) grid(i, 0) = static_cast<double>(i);
    const auto nn = pp::nearest_neighbors(grid, 2, tb::Exec::serial);
    CHECK(nn[2] == std::vector<std::size_t>{1, 3});
    CHECK(nn[0] == std::vector<std::size_t>{1, 2});

    tb::RngStream rng(2, "nn");
    tb::Matrix X(300, 4);
    for (double& v : X.data()) v = std::round(rng.normal() * 3);
    CHECK(pp::nearest_neighbors(X, 5, tb::Exec::serial) == pp::nearest_neighbors(X, 5, tb::Exec::parallel));
}

TEST_CASE("downsample: counts and determinism") {
    std::vector<int> y(10000, 0);
    for (std::size_t i = 0; i < 1000; ++i) y[i * 10] = 1;
    const auto idx = pp::downsample_indices(y, 1.0, tb::RngStream(1, "down"));
    CHECK(idx.size() == 2000);
    std::size_t pos = 0;
    for (auto i : idx) pos += y[i];
    CHECK(pos == 1000);
    CHECK(idx == pp::downsample_indices(y, 1.0, tb::RngStream(1, "down")));

    const auto all = pp::downsample_indices(y, 9.0, tb::RngStream(1, "down"));
    auto sorted = all;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted.size() == 10000);
    for (std::size_t i = 0; i < sorted.size(); ++i) REQUIRE(sorted[i] == i);

    CHECK_THROWS_AS(pp::downsample_indices(y, 10.0, tb::RngStream(1, "down")), tb::ConfigError);
}

TEST_CASE("sessionize: padding, truncation and labels") {
    std::vector<std::tuple<int, int, double, int>> rows;
    for (int k = 0; k < 5; ++k) rows.emplace_back(1, 1, k + 1.0, 0);
    for (int k = 0; k < 25; ++k) rows.emplace_back(1, 2, 100.0 + k, k == 22 ? 1 : 0);
    rows.emplace_back(2, 1, 7.0, 1);
    const auto events = events_fixture(rows);
    pp::SessionizeOptions opt;
    opt.time_steps = 20;
    const auto t = pp::sessionize(events, opt);
    REQUIRE(t.sessions == 3);
    CHECK(t.features == 1);
    CHECK(t.lengths == std::vector<std::size_t>{5, 20, 1});
    CHECK(t.labels == std::vector<int>{0, 1, 1});
    CHECK(t.keys[1] == std::pair{1, 2});
    for (std::size_t s = 5; s < 20; ++s) CHECK(t.step(0, s)[0] == 0.0);
    CHECK(t.step(0, 4)[0] == 5.0);
    CHECK(t.step(1, 19)[0] == 119.0);

    opt.time_steps = 0;
    CHECK_THROWS_AS(pp::sessionize(events, opt), tb::ConfigError);
}

TEST_CASE("sessionize: conservation and brute-force labels on generated logs") {
    synth::GeneratorConfig c;
    c.ueba.users = 12;
    c.ueba.days = 6;
    c.ueba.events_per_day = 30;
    c.anomaly_rate = 0.01;
    auto events = synth::generate_user_activity(c).events;
    const std::vector<std::string> drop{"activity_type"};
    events = events.without(drop);

    for (std::size_t steps : {5u, 30u, 80u}) {
        pp::SessionizeOptions opt;
        opt.time_steps = steps;
        const auto t = pp::sessionize(events, opt);

        std::map<std::pair<int, int>, std::pair<std::size_t, int>> brute;
        const auto user = events.numeric("user_id");
        const auto day = events.numeric("day");
        const auto label = events.numeric("anomaly_label");
        for (std::size_t i = 0; i < events.rows(); ++i) {
            auto& b = brute[{static_cast<int>(user[i]), static_cast<int>(day[i])}];
            b.first += 1;
            b.second = std::max(b.second, static_cast<int>(label[i]));
        }
        REQUIRE(t.sessions == brute.size());
        CHECK(t.sessions == 72);
        std::size_t expected_sum = 0, sum = 0, s = 0;
        for (const auto& [key, b] : brute) {
            CHECK(t.keys[s] == key);
            CHECK(t.labels[s] == b.second);
            CHECK(t.lengths[s] == std::min(b.first, steps));
            expected_sum += std::min(b.first, steps);
            sum += t.lengths[s];
            for (std::size_t k = t.lengths[s]; k < steps; ++k) {
                for (double v : t.step(s, k)) REQUIRE(v == 0.0);
            }
            ++s;
        }
        CHECK(sum == expected_sum);
        if (steps == 80) CHECK(sum == std::min(events.rows(), t.sessions * steps));
    }
}

TEST_CASE("sessionize: full default log has 3000 sessions") {
    synth::GeneratorConfig c;
    c.anomaly_rate = 0.004;
    auto events = synth::generate_user_activity(c).events;
    const std::vector<std::string> drop{"activity_type"};
    const auto t = pp::sessionize(events.without(drop), {});
    CHECK(t.sessions == 3000);
}

TEST_CASE("session tensor: text round trip and select") {
    std::vector<std::tuple<int, int, double, int>> rows{{1, 1, 0.5, 0}, {1, 1, -2.25, 1}, {3, 4, 1e-7, 0}};
    pp::SessionizeOptions opt;
    opt.time_steps = 3;
    const auto t = pp::sessionize(events_fixture(rows), opt);
    std::stringstream buf;
    pp::write_session_tensor(t, buf);
    CHECK(pp::read_session_tensor(buf) == t);

    const std::vector<std::size_t> pick{1};
    const auto one = t.select(pick);
    CHECK(one.sessions == 1);
    CHECK(one.keys[0] == std::pair{3, 4});
    CHECK(one.step(0, 0)[0] == 1e-7);
}
