#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "threatbench/core/dataset.hpp"
#include "threatbench/core/error.hpp"
#include "threatbench/core/exec.hpp"
#include "threatbench/core/quantile.hpp"
#include "threatbench/core/rng.hpp"
#include "threatbench/core/split.hpp"
#include "threatbench/core/summary.hpp"

namespace tb = threatbench;

namespace {

std::vector<double> draws(tb::RngStream rng, int n) {
    std::vector<double> out;
    for (int i = 0; i < n; ++i) out.push_back(rng.uniform());
    return out;
}

tb::Dataset random_dataset(tb::RngStream rng, std::size_t n) {
    std::vector<double> num, bin, lab;
    std::vector<std::string> cat;
    const char* levels[] = {"alpha", "beta", "gamma delta", "x-1"};
    for (std::size_t i = 0; i < n; ++i) {
        switch (rng.uniform_int(std::uint64_t{4})) {
        case 0: num.push_back(rng.normal() * 1e6); break;
        case 1: num.push_back(rng.uniform() * 1e-8); break;
        case 2: num.push_back(std::round(rng.normal(0, 100))); break;
        default: num.push_back(-rng.lognormal(0, 3)); break;
        }
        bin.push_back(rng.bernoulli(0.3) ? 1.0 : 0.0);
        lab.push_back(rng.bernoulli(0.5) ? 1.0 : 0.0);
        cat.emplace_back(levels[rng.uniform_int(std::uint64_t{4})]);
    }
    tb::Dataset d;
    d.add_numeric({"value", tb::ColumnKind::numeric}, num);
    d.add_categorical("kind", cat);
    d.add_numeric({"flag", tb::ColumnKind::binary}, bin);
    d.add_numeric({"label", tb::ColumnKind::label}, lab);
    return d;
}

std::string to_csv(const tb::Dataset& d) {
    std::ostringstream out;
    tb::write_dataset(d, out);
    return out.str();
}

tb::Dataset labelled(std::size_t negatives, std::size_t positives) {
    std::vector<double> x, y;
    for (std::size_t i = 0; i < negatives + positives; ++i) {
        x.push_back(static_cast<double>(i));
        y.push_back(i < negatives ? 0.0 : 1.0);
    }
    tb::Dataset d;
    d.add_numeric({"x", tb::ColumnKind::numeric}, x);
    d.add_numeric({"label", tb::ColumnKind::label}, y);
    return d;
}

} // namespace

TEST_CASE("rng: identical seed and label give identical sequences") {
    CHECK(draws(tb::RngStream(7, "a"), 50) == draws(tb::RngStream(7, "a"), 50));
    CHECK(draws(tb::RngStream(7, "a"), 50) != draws(tb::RngStream(7, "b"), 50));
    CHECK(draws(tb::RngStream(7, "a"), 50) != draws(tb::RngStream(8, "a"), 50));
}

TEST_CASE("rng: child streams do not depend on parent draws") {
    tb::RngStream parent(3, "root");
    const auto before = draws(parent.child("x"), 20);
    for (int i = 0; i < 100; ++i) parent.uniform();
    CHECK(draws(parent.child("x"), 20) == before);
    CHECK(draws(parent.child("x", 0), 20) != draws(parent.child("x", 1), 20));
    CHECK(draws(parent.child("x"), 20) != draws(parent.child("y"), 20));
}

TEST_CASE("rng: distribution ranges") {
    tb::RngStream rng(1, "ranges");
    double sum = 0.0;
    for (int i = 0; i < 20000; ++i) {
        const double u = rng.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
        const auto k = rng.uniform_int(std::int64_t{-3}, std::int64_t{3});
        REQUIRE(k >= -3);
        REQUIRE(k <= 3);
    }
    CHECK(sum / 20000 == doctest::Approx(0.5).epsilon(0.02));

    double pois = 0.0;
    for (int i = 0; i < 5000; ++i) pois += static_cast<double>(rng.poisson(40.0));
    CHECK(pois / 5000 == doctest::Approx(40.0).epsilon(0.02));

    const auto picked = rng.sample_without_replacement(30, 12);
    CHECK(picked.size() == 12);
    CHECK(std::set<std::size_t>(picked.begin(), picked.end()).size() == 12);
    CHECK_THROWS_AS(rng.sample_without_replacement(3, 4), tb::ConfigError);
    CHECK_THROWS_AS(rng.uniform_int(std::uint64_t{0}), tb::ConfigError);
}

TEST_CASE("nearest rank") {
    CHECK(tb::nearest_rank(95, 100) == 95);
    CHECK(tb::nearest_rank(95, 1) == 1);
    CHECK(tb::nearest_rank(50, 5) == 3);
    CHECK(tb::nearest_rank(90, 10) == 9);
    CHECK(tb::nearest_rank(0.1, 10) == 1);
}

TEST_CASE("exec: parallel loop rethrows the lowest failing index") {
    for (auto exec : {tb::Exec::serial, tb::Exec::parallel}) {
        try {
            tb::for_each_index(exec, 64, [](std::size_t i) {
                if (i % 10 == 7) throw tb::DataError("index " + std::to_string(i));
            });
            FAIL("expected an exception");
        } catch (const tb::DataError& e) {
            CHECK(std::string(e.what()) == "index 7");
        }
    }
}

TEST_CASE("dataset: invariants enforced on construction") {
    tb::Dataset d;
    d.add_numeric({"a", tb::ColumnKind::numeric}, {1, 2, 3});
    CHECK_THROWS_AS(d.add_numeric({"a", tb::ColumnKind::numeric}, {1, 2, 3}), tb::DataError);
    CHECK_THROWS_AS(d.add_numeric({"b", tb::ColumnKind::numeric}, {1, 2}), tb::DataError);
    CHECK_THROWS_AS(d.add_numeric({"b", tb::ColumnKind::binary}, {0, 2, 1}), tb::DataError);
    d.add_numeric({"y", tb::ColumnKind::label}, {0, 1, 0});
    CHECK_THROWS_AS(d.add_numeric({"z", tb::ColumnKind::label}, {0, 1, 0}), tb::DataError);
    CHECK(d.label_column() == 1);
    CHECK(d.feature_names() == std::vector<std::string>{"a"});
}

TEST_CASE("dataset: csv round trip over randomized tables") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto d = random_dataset(tb::RngStream(seed, "roundtrip"), 1 + seed * 7);
        std::istringstream in(to_csv(d));
        const auto back = tb::read_dataset(in, d.schema());
        REQUIRE(back == d);
        CHECK(to_csv(back) == to_csv(d));
    }
}

TEST_CASE("dataset: empty table writes the header only") {
    const auto d = random_dataset(tb::RngStream(1, "empty"), 0);
    CHECK(to_csv(d) == "value,kind,flag,label\n");
    std::istringstream in(to_csv(d));
    CHECK(tb::read_dataset(in, d.schema()).rows() == 0);
}

TEST_CASE("dataset: parse errors name row and column") {
    const tb::Schema schema{{"port", tb::ColumnKind::numeric}, {"bytes", tb::ColumnKind::numeric}};
    std::istringstream ok("port,bytes\n1,2\n3,4\n5,6\n");
    CHECK(tb::read_dataset(ok, schema).rows() == 3);

    std::istringstream bad("port,bytes\n1,2\n3,abc\n");
    try {
        (void)tb::read_dataset(bad, schema);
        FAIL("expected a parse error");
    } catch (const tb::DataError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("row 2") != std::string::npos);
        CHECK(msg.find("\"bytes\"") != std::string::npos);
    }

    std::istringstream header("port,size\n1,2\n");
    CHECK_THROWS_AS(tb::read_dataset(header, schema), tb::DataError);
    CHECK_THROWS_AS(tb::load_dataset("/nonexistent/file.csv", schema), tb::DataError);
}

TEST_CASE("format_double is shortest round trip") {
    for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 123456789.0, 0.0}) {
        CHECK(std::stod(tb::format_double(v)) == v);
    }
    CHECK(tb::format_double(0.1) == "0.1");
    CHECK(tb::format_double(3.0) == "3");
}

TEST_CASE("summary: constants, counts and quantiles") {
    tb::Dataset d;
    d.add_numeric({"c", tb::ColumnKind::numeric}, std::vector<double>(10, 4.0));
    d.add_numeric({"b", tb::ColumnKind::binary}, {1, 1, 1, 0, 1, 1, 0, 1, 0, 1});
    d.add_numeric({"v", tb::ColumnKind::numeric}, {10, 9, 8, 7, 6, 5, 4, 3, 2, 1});
    const auto s = tb::summarize_columns(d);
    REQUIRE(s.size() == 3);
    CHECK(s[0].stats->std == 0.0);
    CHECK(s[0].stats->min == s[0].stats->max);
    CHECK(s[1].counts.at("1") == 7);
    CHECK(s[1].counts.at("0") == 3);
    CHECK(s[2].stats->q25 == 3.0);
    CHECK(s[2].stats->median == 5.0);
    CHECK(s[2].stats->q75 == 8.0);
    CHECK(s[2].stats->std == doctest::Approx(std::sqrt(8.25)));

    CHECK_THROWS_AS(tb::summarize_columns(tb::Dataset{}), tb::DataError);
}

TEST_CASE("histogram counts every value") {
    std::vector<double> v;
    for (int i = 0; i < 1000; ++i) v.push_back(std::sin(i) * 5);
    const auto bins = tb::histogram(v, 20);
    REQUIRE(bins.size() == 20);
    std::size_t total = 0;
    for (const auto& b : bins) total += b.count;
    CHECK(total == 1000);
    CHECK(bins.back().upper == *std::max_element(v.begin(), v.end()));
}

TEST_CASE("split: per-class rounding") {
    const auto d = labelled(90, 10);
    const auto [train, test] = tb::stratified_split(d, "label", 0.3, tb::RngStream(5, "split"));
    const auto y = test.labels("label");
    CHECK(test.rows() == 30);
    CHECK(std::count(y.begin(), y.end(), 1) == 3);
    CHECK(train.rows() == 70);

    const auto again = tb::stratified_split(d, "label", 0.3, tb::RngStream(5, "split"));
    CHECK(again.first == train);
    CHECK(again.second == test);
}

TEST_CASE("split: partition and stratification property") {
    tb::RngStream gen(11, "gen");
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t pos = 2 + gen.uniform_int(std::uint64_t{60});
        const std::size_t neg = 2 + gen.uniform_int(std::uint64_t{300});
        const double fraction = 0.05 + 0.9 * gen.uniform();
        std::vector<int> labels(neg, 0);
        labels.insert(labels.end(), pos, 1);
        gen.shuffle(labels);
        const auto s = tb::stratified_split_indices(labels, fraction, gen.child("s", trial));

        std::vector<std::size_t> all = s.train;
        all.insert(all.end(), s.test.begin(), s.test.end());
        std::sort(all.begin(), all.end());
        for (std::size_t i = 0; i < all.size(); ++i) REQUIRE(all[i] == i);
        REQUIRE(std::is_sorted(s.test.begin(), s.test.end()));

        std::size_t test_pos = 0;
        for (auto i : s.test) test_pos += labels[i];
        const double test_n = static_cast<double>(s.test.size());
        const double full = static_cast<double>(pos) / static_cast<double>(labels.size());
        CHECK(std::abs(static_cast<double>(test_pos) / test_n - full) <= 1.0 / test_n + 1e-12);
        CHECK(test_pos == static_cast<std::size_t>(std::floor(static_cast<double>(pos) * fraction + 0.5)));
    }
}

TEST_CASE("split: errors") {
    const auto d = labelled(10, 1);
    CHECK_THROWS_AS(tb::stratified_split(d, "label", 0.3, tb::RngStream(1, "s")), tb::DataError);
    const auto ok = labelled(10, 5);
    CHECK_THROWS_AS(tb::stratified_split(ok, "label", 0.0, tb::RngStream(1, "s")), tb::ConfigError);
    CHECK_THROWS_AS(tb::stratified_split(ok, "label", 1.0, tb::RngStream(1, "s")), tb::ConfigError);
}
