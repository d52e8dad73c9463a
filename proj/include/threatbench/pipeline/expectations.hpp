#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "threatbench/pipeline/report.hpp"

namespace threatbench::pipeline {

enum class CheckStatus { pass, fail, skipped };

struct CheckResult {
    std::string model;
    std::string metric;
    double bound = 0.0;
    bool is_min = true;
    double actual = 0.0;
    CheckStatus status = CheckStatus::fail;

    [[nodiscard]] std::string describe() const;
};

/// Expectations document:
///   {"domains": {"<domain>": [{"model": "<name>|*", "metric": "<path>",
///                              "min"|"max": <bound>, "when": {<config key>: <value>}}]}}
/// Metric paths: accuracy, macro_f1, roc_auc, positive.<precision|recall|f1>,
/// negative.<precision|recall|f1>. A check whose "when" does not match the
/// report's config is skipped.
std::vector<CheckResult> check_expectations(const RunReport& report,
                                            const nlohmann::json& expectations);

nlohmann::json load_expectations(const std::filesystem::path& path);

} // namespace threatbench::pipeline
