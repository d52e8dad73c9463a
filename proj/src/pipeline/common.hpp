#pragma once

#include <cstddef>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "threatbench/core/dataset.hpp"
#include "threatbench/core/error.hpp"
#include "threatbench/core/matrix.hpp"
#include "threatbench/core/rng.hpp"
#include "threatbench/evalx/attribution.hpp"
#include "threatbench/pipeline/config.hpp"
#include "threatbench/pipeline/report.hpp"

namespace threatbench::pipeline::detail {

/// Shared state of one pipeline run: stage manifest, leakage audit and
/// artifact bookkeeping. Row ids always refer to rows of the generated table.
class RunContext {
public:
    explicit RunContext(const PipelineConfig& config);

    const PipelineConfig& config;
    RngStream root;
    RunReport report;

    /// Runs body as a named stage. Errors are rethrown with the stage name
    /// prefixed and their type preserved.
    template <class Body>
    decltype(auto) stage(const std::string& name, Body&& body) {
        report.stages.push_back(name);
        try {
            return body();
        } catch (const ConfigError& e) {
            throw ConfigError(prefix(name, e));
        } catch (const DataError& e) {
            throw DataError(prefix(name, e));
        } catch (const NumericError& e) {
            throw NumericError(prefix(name, e));
        }
    }

    void set_test_rows(std::span<const std::size_t> ids);
    /// Records that a fit or calibration stage consumed the given rows.
    void audit(const std::string& stage, std::span<const std::size_t> ids);

    /// Writes text under the output directory and records its digest.
    void write_artifact(const std::string& name, const std::string& relative_path,
                        const std::string& text);

private:
    static std::string prefix(const std::string& stage, const std::exception& e);
    std::set<std::size_t> test_rows_;
};

/// ids[i] for each i in positions.
std::vector<std::size_t> compose(std::span<const std::size_t> ids,
                                 std::span<const std::size_t> positions);
std::vector<int> gather(std::span<const int> values, std::span<const std::size_t> positions);

/// Replaces each listed numeric column by log1p(max(x, 0)).
Dataset log1p_columns(const Dataset& dataset, std::span<const std::string> columns);

/// Names of the dataset's numeric (not binary, not label) columns, minus `skip`.
std::vector<std::string> numeric_columns(const Dataset& dataset,
                                         std::span<const std::string> skip = {});

DatasetSummary summarize(const Dataset& generated, const std::string& unit, std::size_t rows,
                         std::size_t positives, std::size_t train_rows,
                         std::size_t train_positives, std::size_t test_rows,
                         std::size_t test_positives, std::size_t bins);

std::size_t count_positive(std::span<const int> labels);

/// Metrics block for thresholded scores: predicted threat iff score > threshold
/// (strict) or score >= threshold (non-strict).
ModelBlock score_block(const std::string& name, std::span<const int> y,
                       std::span<const double> scores, double threshold, bool strict,
                       const std::string& positive_class, const std::string& negative_class);

void attach_importances(ModelBlock& block, const evalx::AttributionReport& report);

std::string dump_model(const nlohmann::json& doc);

} // namespace threatbench::pipeline::detail
