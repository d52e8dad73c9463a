#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "threatbench/core/error.hpp"
#include "threatbench/pipeline/config.hpp"
#include "threatbench/pipeline/expectations.hpp"
#include "threatbench/pipeline/pipeline.hpp"
#include "threatbench/pipeline/report.hpp"

namespace tb = threatbench;
namespace pl = threatbench::pipeline;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("threatbench_unit_" + name);
    fs::remove_all(dir);
    return dir;
}

pl::PipelineConfig small_config(pl::Domain domain, const std::string& name) {
    auto c = pl::default_config(domain);
    c.generator.n = 2000;
    c.models.forest.n_trees = 10;
    c.models.boosting.max_rounds = 20;
    c.models.isolation.n_trees = 20;
    c.models.dense.epochs = 5;
    c.importance_repeats = 1;
    c.out_dir = scratch(name);
    return c;
}

pl::RunReport report_with(double recall, double auc) {
    pl::RunReport r;
    r.domain = "ueba";
    r.config = {{"threshold_percentile", 90.0}};
    pl::ModelBlock m;
    m.name = "lstm_autoencoder";
    m.metrics.positive.recall = recall;
    m.metrics.roc_auc = auc;
    r.models.push_back(m);
    return r;
}

} // namespace

TEST_CASE("config: defaults are valid and round trip strictly") {
    for (auto d : {pl::Domain::intrusion, pl::Domain::malware, pl::Domain::phishing, pl::Domain::ueba}) {
        const auto c = pl::default_config(d);
        CHECK(c.domain == d);
        CHECK(c.seed == 42);
        CHECK(pl::domain_from_string(pl::to_string(d)) == d);
        const auto doc = pl::to_json(c);
        CHECK(pl::to_json(pl::config_from_json(nlohmann::json::parse(doc.dump()))) == doc);

        auto missing = doc;
        missing.erase("seed");
        CHECK_THROWS_AS(pl::config_from_json(missing), tb::ConfigError);
        auto extra = doc;
        extra["colour"] = 1;
        CHECK_THROWS_AS(pl::config_from_json(extra), tb::ConfigError);
    }
    CHECK_THROWS_AS(pl::domain_from_string("dns"), tb::ConfigError);
}

TEST_CASE("config: merge and overrides") {
    auto doc = pl::to_json(pl::default_config(pl::Domain::malware));
    pl::merge_config(doc, {{"models", {{"random_forest", {{"n_trees", 7}}}}}});
    CHECK(doc["models"]["random_forest"]["n_trees"] == 7);
    CHECK_THROWS_AS(pl::merge_config(doc, {{"models", {{"random_forest", {{"n_tree", 7}}}}}}), tb::ConfigError);

    pl::apply_override(doc, "threshold_percentile=90");
    CHECK(doc["threshold_percentile"] == 90);
    pl::apply_override(doc, "models.boosting.learning_rate=0.05");
    CHECK(doc["models"]["boosting"]["learning_rate"] == 0.05);
    CHECK_THROWS_AS(pl::apply_override(doc, "no_equals_sign"), tb::ConfigError);
    CHECK_THROWS_AS(pl::apply_override(doc, "models.random_forest.depth=3"), tb::ConfigError);

    const auto c = pl::load_config(pl::Domain::ueba, {}, {"threshold_percentile=90", "seed=7"});
    CHECK(c.threshold_percentile == 90.0);
    CHECK(c.seed == 7);
    CHECK_THROWS_AS(pl::load_config(pl::Domain::ueba, {}, {"threshold_percentile=100"}), tb::ConfigError);
    CHECK_THROWS_AS(pl::load_config(pl::Domain::ueba, {}, {"domain=\"malware\""}), tb::ConfigError);
    CHECK_THROWS_AS(pl::load_config(pl::Domain::ueba, "/nonexistent/config.json", {}), tb::ConfigError);
}

TEST_CASE("expectations: pass, fail and skipped") {
    const nlohmann::json exp = {
        {"domains",
         {{"ueba",
           {{{"model", "*"}, {"metric", "positive.recall"}, {"min", 0.9},
             {"when", {{"threshold_percentile", 90}}}},
            {{"model", "lstm_autoencoder"}, {"metric", "roc_auc"}, {"max", 0.99}},
            {{"model", "*"}, {"metric", "positive.recall"}, {"min", 0.5},
             {"when", {{"threshold_percentile", 95}}}}}}}}};
    const auto good = pl::check_expectations(report_with(0.95, 0.9), exp);
    REQUIRE(good.size() == 3);
    CHECK(good[0].status == pl::CheckStatus::pass);
    CHECK(good[1].status == pl::CheckStatus::pass);
    CHECK(good[2].status == pl::CheckStatus::skipped);
    const auto bad = pl::check_expectations(report_with(0.85, 0.995), exp);
    CHECK(bad[0].status == pl::CheckStatus::fail);
    CHECK(bad[1].status == pl::CheckStatus::fail);
    CHECK_FALSE(bad[0].describe().empty());
}

TEST_CASE("report: digests") {
    CHECK(pl::digest_bytes("") == "cbf29ce484222325");
    CHECK(pl::digest_bytes("a") == "af63dc4c8601ec8c");
    const auto dir = scratch("digest");
    fs::create_directories(dir);
    std::ofstream(dir / "f.txt", std::ios::binary) << "a";
    CHECK(pl::digest_file(dir / "f.txt") == pl::digest_bytes("a"));
    CHECK_THROWS(pl::digest_file(dir / "missing.txt"));
}

TEST_CASE("pipeline: small phishing run is complete, audited and reproducible") {
    const auto c = small_config(pl::Domain::phishing, "phishing");
    const auto r = pl::run_pipeline(c);
    CHECK(r.domain == "phishing");
    CHECK(r.models.size() == 3);
    CHECK(r.dataset.rows == c.generator.n);
    CHECK(r.dataset.test_rows == 600);
    CHECK(r.dataset.train_rows <= r.dataset.rows - r.dataset.test_rows);
    CHECK(r.dataset.train_positives * 2 == r.dataset.train_rows);
    CHECK_FALSE(r.stages.empty());
    REQUIRE_FALSE(r.leakage_audit.empty());
    for (const auto& a : r.leakage_audit) CHECK(a.test_rows_consumed == 0);
    for (const auto& h : r.dataset.histograms) CHECK(h.bins.size() == c.histogram_bins);
    for (const auto& m : r.models) {
        CHECK(m.metrics.confusion.total() == r.dataset.test_rows);
        CHECK(m.importances.size() <= 10);
    }
    for (const auto& a : r.artifacts) CHECK(pl::digest_file(c.out_dir / a.path) == a.digest);

    CHECK(pl::report_from_json(nlohmann::json::parse(pl::to_json(r).dump())) == r);
    const auto written = pl::emit_report(r, c.out_dir);
    CHECK(written.size() == 4);
    CHECK(pl::load_report(c.out_dir / "report.json") == r);
    CHECK_FALSE(pl::format_summary(r).empty());

    auto again = c;
    again.out_dir = scratch("phishing_again");
    auto first = pl::to_json(r);
    auto second = pl::to_json(pl::run_pipeline(again));
    first["config"].erase("out_dir");
    second["config"].erase("out_dir");
    CHECK(first == second);
}

TEST_CASE("pipeline: small intrusion run audits every fit stage") {
    const auto c = small_config(pl::Domain::intrusion, "intrusion");
    const auto r = pl::run_pipeline(c);
    CHECK(r.models.size() == 2);
    REQUIRE_FALSE(r.leakage_audit.empty());
    for (const auto& a : r.leakage_audit) {
        CHECK(a.rows_consumed > 0);
        CHECK(a.test_rows_consumed == 0);
    }
    for (const auto& m : r.models) CHECK(m.threshold.has_value());
    const auto files = pl::generate_dataset(c);
    REQUIRE_FALSE(files.empty());
    for (const auto& f : files) CHECK(fs::exists(f));
}
