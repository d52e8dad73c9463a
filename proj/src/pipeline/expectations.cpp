#include "threatbench/pipeline/expectations.hpp"

#include <cstdio>
#include <fstream>

#include "threatbench/core/error.hpp"

namespace threatbench::pipeline {

std::string CheckResult::describe() const {
    char buf[256];
    const char* tag = status == CheckStatus::pass   ? "PASS"
                      : status == CheckStatus::fail ? "FAIL"
                                                    : "SKIP";
    std::snprintf(buf, sizeof buf, "%s  %-20s %-18s %.4f %s %.4f", tag, model.c_str(),
                  metric.c_str(), actual, is_min ? ">=" : "<=", bound);
    return buf;
}

namespace {

double metric_value(const evalx::MetricsReport& m, const std::string& path) {
    if (path == "accuracy") return m.accuracy;
    if (path == "macro_f1") return m.macro_f1;
    if (path == "roc_auc") {
        if (!m.roc_auc) throw DataError("report has no roc_auc");
        return *m.roc_auc;
    }
    const auto dot = path.find('.');
    if (dot != std::string::npos) {
        const std::string side = path.substr(0, dot);
        const std::string field = path.substr(dot + 1);
        const evalx::ClassMetrics* c = side == "positive"   ? &m.positive
                                       : side == "negative" ? &m.negative
                                                            : nullptr;
        if (c) {
            if (field == "precision") return c->precision;
            if (field == "recall") return c->recall;
            if (field == "f1") return c->f1;
        }
    }
    throw ConfigError("unknown metric path '" + path + "'");
}

bool condition_holds(const nlohmann::json& config, const nlohmann::json& when) {
    for (auto it = when.begin(); it != when.end(); ++it) {
        const auto ptr = nlohmann::json::json_pointer("/" + [&] {
            std::string k = it.key();
            for (auto& ch : k) {
                if (ch == '.') ch = '/';
            }
            return k;
        }());
        if (!config.contains(ptr) || config.at(ptr) != it.value()) return false;
    }
    return true;
}

} // namespace

std::vector<CheckResult> check_expectations(const RunReport& report,
                                            const nlohmann::json& expectations) {
    std::vector<CheckResult> out;
    if (!expectations.contains("domains") || !expectations["domains"].contains(report.domain)) {
        return out;
    }
    try {
        for (const auto& check : expectations["domains"][report.domain]) {
            const auto model = check.at("model").get<std::string>();
            const auto metric = check.at("metric").get<std::string>();
            const bool is_min = check.contains("min");
            if (is_min == check.contains("max")) {
                throw ConfigError("expectation needs exactly one of min or max");
            }
            const double bound = check.at(is_min ? "min" : "max").get<double>();
            const bool active = !check.contains("when") || condition_holds(report.config, check["when"]);
            bool matched = false;
            for (const auto& block : report.models) {
                if (model != "*" && model != block.name) continue;
                matched = true;
                CheckResult r{block.name, metric, bound, is_min, metric_value(block.metrics, metric),
                              CheckStatus::skipped};
                if (active) {
                    const bool ok = is_min ? r.actual >= bound : r.actual <= bound;
                    r.status = ok ? CheckStatus::pass : CheckStatus::fail;
                }
                out.push_back(r);
            }
            if (!matched) {
                out.push_back({model, metric, bound, is_min, 0.0,
                               active ? CheckStatus::fail : CheckStatus::skipped});
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed expectations: ") + e.what());
    }
    return out;
}

nlohmann::json load_expectations(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open expectations file " + path.string());
    auto doc = nlohmann::json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw ConfigError("expectations file is not valid JSON");
    return doc;
}

} // namespace threatbench::pipeline
