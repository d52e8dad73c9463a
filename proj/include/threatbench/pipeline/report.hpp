#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "threatbench/core/summary.hpp"
#include "threatbench/evalx/attribution.hpp"
#include "threatbench/evalx/metrics.hpp"
#include "threatbench/linear/platt.hpp"
#include "threatbench/neural/threshold.hpp"

namespace threatbench::pipeline {

inline constexpr int kReportSchemaVersion = 1;

struct FeatureHistogram {
    std::string feature;
    std::vector<HistogramBin> bins;
};

struct DatasetSummary {
    std::size_t rows = 0;
    std::size_t positives = 0;
    std::size_t train_rows = 0;
    std::size_t train_positives = 0;
    std::size_t test_rows = 0;
    std::size_t test_positives = 0;
    /// What one row is: "flow", "file", "email" or "session".
    std::string unit;
    std::vector<ColumnSummary> columns;
    std::vector<FeatureHistogram> histograms;
};

struct ModelBlock {
    std::string name;
    evalx::MetricsReport metrics;
    std::optional<neural::AnomalyThreshold> threshold;
    std::optional<linear::CalibratorSpec> calibration;
    std::vector<evalx::FeatureImportance> importances; ///< top 10 by permutation importance
    std::string importance_metric;
    std::string model_file;
    nlohmann::json training; ///< model-specific training facts (loss curves, best iteration)
};

/// One fit or calibration stage and the generated rows it consumed.
struct StageAudit {
    std::string stage;
    std::size_t rows_consumed = 0;
    std::size_t test_rows_consumed = 0;
};

struct Artifact {
    std::string name;
    std::string path;   ///< relative to the output directory
    std::string digest; ///< 64-bit FNV-1a of the file bytes, hex
};

struct FlaggedSession {
    int user_id = 0;
    int day = 0;
    double error = 0.0;
    int label = 0;
};

struct RunReport {
    int schema_version = kReportSchemaVersion;
    std::string toolkit_version;
    std::string domain;
    nlohmann::json config;
    DatasetSummary dataset;
    std::vector<ModelBlock> models;
    std::vector<std::string> stages;
    std::vector<StageAudit> leakage_audit;
    std::vector<Artifact> artifacts;
    std::vector<FlaggedSession> flagged_sessions;
};

nlohmann::json to_json(const RunReport& report);
RunReport report_from_json(const nlohmann::json& doc);
bool operator==(const RunReport& a, const RunReport& b);

/// Fixed-layout human-readable summary.
std::string format_summary(const RunReport& report);

/// Writes report.json, summary.txt, histograms.csv and value_counts.csv into
/// out_dir (created if needed). Returns the written paths.
std::vector<std::filesystem::path> emit_report(const RunReport& report,
                                               const std::filesystem::path& out_dir);

RunReport load_report(const std::filesystem::path& path);

/// Hex FNV-1a digest of a byte string or file.
std::string digest_bytes(std::string_view bytes);
std::string digest_file(const std::filesystem::path& path);

} // namespace threatbench::pipeline
