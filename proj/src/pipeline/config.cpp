#include "threatbench/pipeline/config.hpp"

#include <fstream>

#include "threatbench/core/error.hpp"

namespace threatbench::synth {
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(NetworkParams, tcp_share, udp_share, icmp_share, bytes_log_mean,
                                   bytes_log_sd, duration_log_mean, duration_log_sd, packets_mean,
                                   packets_sd, internal_rate)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(MalwareParams, benign_entropy_mean, malicious_entropy_mean,
                                   entropy_sd, benign_signed_rate, malicious_signed_rate,
                                   benign_packed_rate, malicious_packed_rate, stealth_fraction)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(EmailParams, noise_fraction)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(UebaParams, users, days, events_per_day, anomalies_per_session)
} // namespace threatbench::synth

namespace threatbench::forest {
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ForestConfig, n_trees, max_depth, min_samples_split,
                                   features_per_split, bootstrap)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(BoostingConfig, learning_rate, max_rounds, max_depth, lambda,
                                   gamma, subsample, early_stopping_rounds, min_child_weight)
} // namespace threatbench::forest

namespace threatbench::neural {
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(DenseConfig, layer_sizes, l1, epochs, batch_size, step_size)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(LstmConfig, hidden, latent, epochs, batch_size, step_size)
} // namespace threatbench::neural

namespace threatbench::pipeline {

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(PreprocessConfig, test_fraction, validation_fraction, smote_k,
                                   downsample_ratio, time_steps, log_columns)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(IsolationConfig, n_trees, psi)

std::string to_string(Domain domain) {
    switch (domain) {
    case Domain::intrusion: return "intrusion";
    case Domain::malware: return "malware";
    case Domain::phishing: return "phishing";
    case Domain::ueba: return "ueba";
    }
    return "intrusion";
}

Domain domain_from_string(std::string_view name) {
    if (name == "intrusion") return Domain::intrusion;
    if (name == "malware") return Domain::malware;
    if (name == "phishing") return Domain::phishing;
    if (name == "ueba") return Domain::ueba;
    throw ConfigError("unknown domain '" + std::string(name) +
                      "' (expected intrusion, malware, phishing or ueba)");
}

PipelineConfig default_config(Domain domain) {
    PipelineConfig c;
    c.domain = domain;
    c.out_dir = "out/" + to_string(domain);
    switch (domain) {
    case Domain::intrusion:
        c.generator.n = 20000;
        c.generator.anomaly_rate = 0.05;
        c.preprocess.log_columns = {"bytes", "duration", "packet_count"};
        break;
    case Domain::malware:
    case Domain::phishing:
        c.generator.n = 10000;
        c.generator.anomaly_rate = 0.1;
        break;
    case Domain::ueba:
        c.generator.anomaly_rate = 0.004;
        break;
    }
    return c;
}

nlohmann::json to_json(const PipelineConfig& c) {
    nlohmann::json logistic = {{"l2", c.models.logistic.l2},
                               {"epochs", c.models.logistic.epochs},
                               {"step_size", c.models.logistic.step_size},
                               {"class_weights", nullptr}};
    if (c.models.logistic.class_weights) logistic["class_weights"] = *c.models.logistic.class_weights;
    return {
        {"domain", to_string(c.domain)},
        {"seed", c.seed},
        {"out_dir", c.out_dir.generic_string()},
        {"generator",
         {{"n", c.generator.n},
          {"anomaly_rate", c.generator.anomaly_rate},
          {"network", c.generator.network},
          {"malware", c.generator.malware},
          {"email", c.generator.email},
          {"ueba", c.generator.ueba}}},
        {"preprocess", c.preprocess},
        {"models",
         {{"random_forest", c.models.forest},
          {"boosting", c.models.boosting},
          {"logistic", logistic},
          {"isolation_forest", c.models.isolation},
          {"dense_autoencoder", c.models.dense},
          {"lstm_autoencoder", c.models.lstm},
          {"calibrate_boosting", c.models.calibrate_boosting},
          {"calibrate_logistic", c.models.calibrate_logistic}}},
        {"threshold_percentile", c.threshold_percentile},
        {"importance_repeats", c.importance_repeats},
        {"histogram_bins", c.histogram_bins},
    };
}

namespace {

PipelineConfig parse_full(const nlohmann::json& d) {
    PipelineConfig c;
    c.domain = domain_from_string(d.at("domain").get<std::string>());
    c.seed = d.at("seed").get<std::uint64_t>();
    c.out_dir = d.at("out_dir").get<std::string>();
    const auto& g = d.at("generator");
    c.generator.n = g.at("n").get<std::size_t>();
    c.generator.anomaly_rate = g.at("anomaly_rate").get<double>();
    c.generator.seed = c.seed;
    c.generator.network = g.at("network").get<synth::NetworkParams>();
    c.generator.malware = g.at("malware").get<synth::MalwareParams>();
    c.generator.email = g.at("email").get<synth::EmailParams>();
    c.generator.ueba = g.at("ueba").get<synth::UebaParams>();
    c.preprocess = d.at("preprocess").get<PreprocessConfig>();
    const auto& m = d.at("models");
    c.models.forest = m.at("random_forest").get<forest::ForestConfig>();
    c.models.boosting = m.at("boosting").get<forest::BoostingConfig>();
    const auto& lg = m.at("logistic");
    c.models.logistic.l2 = lg.at("l2").get<double>();
    c.models.logistic.epochs = lg.at("epochs").get<int>();
    c.models.logistic.step_size = lg.at("step_size").get<double>();
    if (!lg.at("class_weights").is_null()) {
        c.models.logistic.class_weights = lg.at("class_weights").get<std::array<double, 2>>();
    }
    c.models.isolation = m.at("isolation_forest").get<IsolationConfig>();
    c.models.dense = m.at("dense_autoencoder").get<neural::DenseConfig>();
    c.models.lstm = m.at("lstm_autoencoder").get<neural::LstmConfig>();
    c.models.calibrate_boosting = m.at("calibrate_boosting").get<bool>();
    c.models.calibrate_logistic = m.at("calibrate_logistic").get<bool>();
    c.threshold_percentile = d.at("threshold_percentile").get<double>();
    c.importance_repeats = d.at("importance_repeats").get<int>();
    c.histogram_bins = d.at("histogram_bins").get<std::size_t>();

    if (!(c.preprocess.test_fraction > 0.0 && c.preprocess.test_fraction < 1.0)) {
        throw ConfigError("preprocess.test_fraction must lie in (0, 1)");
    }
    if (!(c.preprocess.validation_fraction > 0.0 && c.preprocess.validation_fraction < 1.0)) {
        throw ConfigError("preprocess.validation_fraction must lie in (0, 1)");
    }
    if (!(c.threshold_percentile > 0.0 && c.threshold_percentile < 100.0)) {
        throw ConfigError("threshold_percentile must lie in (0, 100)");
    }
    if (c.importance_repeats < 1) throw ConfigError("importance_repeats must be at least 1");
    if (c.histogram_bins < 1) throw ConfigError("histogram_bins must be at least 1");
    return c;
}

void check_fields(const nlohmann::json& doc, const nlohmann::json& reference, const std::string& path) {
    if (!reference.is_object()) return;
    if (!doc.is_object()) throw ConfigError("config field '" + path + "' must be an object");
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        const std::string key = path.empty() ? it.key() : path + "." + it.key();
        if (!reference.contains(it.key())) throw ConfigError("unknown config field '" + key + "'");
        check_fields(it.value(), reference.at(it.key()), key);
    }
}

} // namespace

PipelineConfig config_from_json(const nlohmann::json& doc) {
    try {
        if (doc.is_object() && doc.contains("domain")) {
            const auto domain = domain_from_string(doc.at("domain").get<std::string>());
            check_fields(doc, to_json(default_config(domain)), "");
        }
        return parse_full(doc);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid config: ") + e.what());
    }
}

void merge_config(nlohmann::json& base, const nlohmann::json& patch, const std::string& path) {
    if (!patch.is_object()) throw ConfigError("config document must be an object");
    for (auto it = patch.begin(); it != patch.end(); ++it) {
        const std::string key = path.empty() ? it.key() : path + "." + it.key();
        if (!base.contains(it.key())) throw ConfigError("unknown config field '" + key + "'");
        auto& target = base[it.key()];
        if (target.is_object()) {
            merge_config(target, it.value(), key);
        } else {
            target = it.value();
        }
    }
}

void apply_override(nlohmann::json& doc, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos || eq == 0) {
        throw ConfigError("override must look like key=value: '" + std::string(assignment) + "'");
    }
    const std::string key(assignment.substr(0, eq));
    const std::string text(assignment.substr(eq + 1));
    nlohmann::json value = nlohmann::json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;

    nlohmann::json patch = value;
    std::size_t end = key.size();
    while (true) {
        const auto dot = key.rfind('.', end - 1);
        const std::size_t start = dot == std::string::npos ? 0 : dot + 1;
        nlohmann::json wrapped;
        wrapped[key.substr(start, end - start)] = std::move(patch);
        patch = std::move(wrapped);
        if (dot == std::string::npos) break;
        end = dot;
    }
    merge_config(doc, patch);
}

PipelineConfig load_config(Domain domain, const std::filesystem::path& file,
                           const std::vector<std::string>& overrides) {
    nlohmann::json doc = to_json(default_config(domain));
    if (!file.empty()) {
        std::ifstream in(file);
        if (!in) throw ConfigError("cannot open config file " + file.string());
        nlohmann::json patch = nlohmann::json::parse(in, nullptr, false);
        if (patch.is_discarded()) throw ConfigError("config file is not valid JSON: " + file.string());
        if (patch.contains("domain") && patch["domain"] != to_string(domain)) {
            throw ConfigError("config file domain does not match the requested domain");
        }
        merge_config(doc, patch);
    }
    for (const auto& o : overrides) apply_override(doc, o);
    if (doc.at("domain") != to_string(domain)) {
        throw ConfigError("the domain cannot be overridden");
    }
    return config_from_json(doc);
}

} // namespace threatbench::pipeline
