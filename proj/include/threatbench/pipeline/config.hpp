#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "threatbench/forest/boosting.hpp"
#include "threatbench/forest/random_forest.hpp"
#include "threatbench/linear/logistic.hpp"
#include "threatbench/neural/dense_autoencoder.hpp"
#include "threatbench/neural/lstm_autoencoder.hpp"
#include "threatbench/synth/synth.hpp"

namespace threatbench::pipeline {

enum class Domain { intrusion, malware, phishing, ueba };

std::string to_string(Domain domain);
Domain domain_from_string(std::string_view name);

struct PreprocessConfig {
    double test_fraction = 0.3;
    /// Share of the training partition held out for early stopping and calibration.
    double validation_fraction = 0.2;
    std::size_t smote_k = 5;
    /// Majority:minority ratio after downsampling (phishing).
    double downsample_ratio = 1.0;
    std::size_t time_steps = 50;
    /// Numeric columns replaced by log1p(x) before scaling.
    std::vector<std::string> log_columns;
};

struct IsolationConfig {
    int n_trees = 100;
    std::size_t psi = 256;
};

struct ModelConfig {
    forest::ForestConfig forest;
    forest::BoostingConfig boosting;
    linear::LogisticConfig logistic;
    IsolationConfig isolation;
    neural::DenseConfig dense;
    neural::LstmConfig lstm;
    bool calibrate_boosting = true;
    bool calibrate_logistic = false;
};

struct PipelineConfig {
    Domain domain = Domain::phishing;
    std::uint64_t seed = 42;
    std::filesystem::path out_dir = "out";
    synth::GeneratorConfig generator;
    PreprocessConfig preprocess;
    ModelConfig models;
    double threshold_percentile = 95.0;
    int importance_repeats = 3;
    std::size_t histogram_bins = 20;
};

/// Documented defaults of one domain.
PipelineConfig default_config(Domain domain);

nlohmann::json to_json(const PipelineConfig& config);
/// Strict reader: every field must be present and no unknown field is allowed.
PipelineConfig config_from_json(const nlohmann::json& doc);

/// Recursively overlays `patch` on `base`. Keys absent from base are a ConfigError.
void merge_config(nlohmann::json& base, const nlohmann::json& patch, const std::string& path = "");

/// Applies "dotted.key=value". The value is read as JSON when it parses,
/// otherwise as a string.
void apply_override(nlohmann::json& doc, std::string_view assignment);

/// Defaults for the domain, then the optional config file, then overrides.
PipelineConfig load_config(Domain domain, const std::filesystem::path& file,
                           const std::vector<std::string>& overrides);

} // namespace threatbench::pipeline
