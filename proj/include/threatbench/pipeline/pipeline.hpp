#pragma once

#include <filesystem>
#include <vector>

#include "threatbench/pipeline/config.hpp"
#include "threatbench/pipeline/report.hpp"

namespace threatbench::pipeline {

/// Isolation Forest and dense autoencoder on network flows.
RunReport run_intrusion(const PipelineConfig& config);
/// Random Forest and gradient boosting on SMOTE-balanced file features.
RunReport run_malware(const PipelineConfig& config);
/// Logistic regression, Random Forest and gradient boosting on downsampled emails.
RunReport run_phishing(const PipelineConfig& config);
/// LSTM autoencoder over per-user, per-day activity sessions.
RunReport run_ueba(const PipelineConfig& config);

/// Dispatches on config.domain. Artifacts go to config.out_dir; the report is
/// returned but not emitted.
RunReport run_pipeline(const PipelineConfig& config);

/// Writes the domain's generated data under out_dir and returns the paths.
std::vector<std::filesystem::path> generate_dataset(const PipelineConfig& config);

} // namespace threatbench::pipeline
