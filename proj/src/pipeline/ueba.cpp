#include <map>
#include <numeric>
#include <sstream>

#include "common.hpp"
#include "threatbench/core/split.hpp"
#include "threatbench/neural/lstm_autoencoder.hpp"
#include "threatbench/neural/threshold.hpp"
#include "threatbench/pipeline/pipeline.hpp"
#include "threatbench/preprocess/encode.hpp"
#include "threatbench/preprocess/session.hpp"

namespace threatbench::pipeline {

using namespace detail;

namespace {

/// Event indices of each (user, day) session, in key order.
std::map<std::pair<int, int>, std::vector<std::size_t>> group_sessions(const Dataset& events) {
    const auto users = events.numeric("user_id");
    const auto days = events.numeric("day");
    std::map<std::pair<int, int>, std::vector<std::size_t>> out;
    for (std::size_t i = 0; i < events.rows(); ++i) {
        out[{static_cast<int>(users[i]), static_cast<int>(days[i])}].push_back(i);
    }
    return out;
}

/// AUC drop when feature j is shuffled across every unpadded step of the
/// tensor. Streams follow the layout of evalx::permutation_importance.
evalx::AttributionReport session_importance(const neural::LstmAutoencoder& model,
                                            const preprocess::SessionTensor& tensor,
                                            std::span<const int> labels, int repeats,
                                            const RngStream& rng) {
    evalx::ImportanceOptions opts;
    opts.metric = evalx::Metric::auc;
    opts.repeats = repeats;
    evalx::AttributionReport report;
    report.features = tensor.feature_names;
    report.metric = opts.metric;
    report.baseline_metric = evalx::evaluate_metric(neural::score_sessions(model, tensor), labels,
                                                    opts);
    std::vector<std::size_t> cells;
    for (std::size_t s = 0; s < tensor.sessions; ++s) {
        for (std::size_t t = 0; t < tensor.lengths[s]; ++t) {
            cells.push_back((s * tensor.time_steps + t) * tensor.features);
        }
    }
    const std::size_t F = tensor.features;
    report.importance.assign(F, 0.0);
    report.importance_std.assign(F, 0.0);
    for (std::size_t j = 0; j < F; ++j) {
        const RngStream feature_rng = rng.child("feature", j);
        std::vector<double> drops;
        for (int r = 0; r < repeats; ++r) {
            RngStream perm_rng = feature_rng.child("repeat", static_cast<std::uint64_t>(r));
            std::vector<std::size_t> perm(cells.size());
            std::iota(perm.begin(), perm.end(), 0);
            perm_rng.shuffle(perm);
            preprocess::SessionTensor shuffled = tensor;
            for (std::size_t c = 0; c < cells.size(); ++c) {
                shuffled.data[cells[c] + j] = tensor.data[cells[perm[c]] + j];
            }
            const auto errors = neural::score_sessions(model, shuffled);
            drops.push_back(report.baseline_metric - evalx::evaluate_metric(errors, labels, opts));
        }
        double mean = std::accumulate(drops.begin(), drops.end(), 0.0) / repeats;
        double var = 0.0;
        for (double d : drops) var += (d - mean) * (d - mean);
        report.importance[j] = mean;
        report.importance_std[j] = std::sqrt(var / repeats);
    }
    return report;
}

} // namespace

RunReport run_ueba(const PipelineConfig& config) {
    RunContext ctx(config);
    const std::string label = "anomaly_label";

    const auto events = ctx.stage("generate", [&] {
        auto activity = synth::generate_user_activity(config.generator);
        std::ostringstream csv;
        write_dataset(activity.events, csv);
        ctx.write_artifact("events", "data/events.csv", csv.str());
        return activity.events;
    });
    const Labels event_labels = events.labels(label);

    const auto groups = group_sessions(events);
    std::vector<std::vector<std::size_t>> session_events;
    std::vector<int> session_labels;
    for (const auto& [key, ids] : groups) {
        int l = 0;
        for (std::size_t i : ids) l = std::max(l, event_labels[i]);
        session_events.push_back(ids);
        session_labels.push_back(l);
    }

    const auto split = ctx.stage("split", [&] {
        return stratified_split_indices(session_labels, config.preprocess.test_fraction,
                                        ctx.root.child("split"));
    });
    auto events_of = [&](std::span<const std::size_t> sessions) {
        std::vector<std::size_t> out;
        for (std::size_t s : sessions) {
            out.insert(out.end(), session_events[s].begin(), session_events[s].end());
        }
        std::sort(out.begin(), out.end());
        return out;
    };
    const auto train_events = events_of(split.train);
    const auto test_events = events_of(split.test);
    ctx.set_test_rows(test_events);
    const Labels y_train_sessions = gather(session_labels, split.train);
    const Labels y_test = gather(session_labels, split.test);
    ctx.report.dataset = summarize(events, "session", session_labels.size(),
                                   count_positive(session_labels), split.train.size(),
                                   count_positive(y_train_sessions), split.test.size(),
                                   count_positive(y_test), config.histogram_bins);

    const auto encoded = ctx.stage("fit_encoder", [&] {
        const std::vector<std::string> cats{"activity_type"};
        const auto spec = preprocess::fit_one_hot(events.select_rows(train_events), cats);
        ctx.audit("fit_encoder", train_events);
        return preprocess::apply_one_hot(spec, events);
    });
    const auto scaled = ctx.stage("fit_scaler", [&] {
        const std::vector<std::string> skip{"user_id", "day"};
        const auto cols = numeric_columns(encoded, skip);
        const auto spec = preprocess::fit_scaler(encoded.select_rows(train_events), cols);
        ctx.audit("fit_scaler", train_events);
        return preprocess::apply_scaler(spec, encoded);
    });

    const auto tensor = ctx.stage("sessionize", [&] {
        preprocess::SessionizeOptions opts;
        opts.time_steps = config.preprocess.time_steps;
        auto t = preprocess::sessionize(scaled, opts);
        if (t.sessions != session_labels.size()) {
            throw DataError("session count differs from the event grouping");
        }
        return t;
    });

    std::vector<std::size_t> clean_train;
    for (std::size_t s : split.train) {
        if (session_labels[s] == 0) clean_train.push_back(s);
    }
    const auto clean_tensor = tensor.select(clean_train);
    const auto test_tensor = tensor.select(split.test);
    const auto clean_events = events_of(clean_train);

    const auto lstm = ctx.stage("fit_lstm_autoencoder", [&] {
        auto fit = neural::fit_lstm_autoencoder(clean_tensor, config.models.lstm,
                                                ctx.root.child("lstm_autoencoder"), Exec::parallel);
        ctx.audit("fit_lstm_autoencoder", clean_events);
        ctx.write_artifact("lstm_autoencoder", "models/lstm_autoencoder.json",
                           dump_model(fit.model.to_json()));
        return fit;
    });
    const auto threshold = ctx.stage("calibrate_threshold", [&] {
        const auto errors = neural::score_sessions(lstm.model, clean_tensor);
        ctx.audit("calibrate_threshold", clean_events);
        return neural::calibrate_threshold(errors, config.threshold_percentile);
    });

    ctx.stage("evaluate", [&] {
        const auto errors = neural::score_sessions(lstm.model, test_tensor);
        const auto flags = neural::detect_anomalies(errors, threshold);
        auto block = score_block("lstm_autoencoder", y_test, errors, threshold.value, true,
                                 "insider_threat", "normal");
        block.threshold = threshold;
        block.model_file = "models/lstm_autoencoder.json";
        block.training = {{"hidden", lstm.model.hidden},
                          {"latent", lstm.model.latent},
                          {"train_sessions", clean_tensor.sessions},
                          {"train_loss", lstm.log.train}};
        attach_importances(block, session_importance(lstm.model, test_tensor, y_test,
                                                     config.importance_repeats,
                                                     ctx.root.child("importance").child("lstm")));
        for (std::size_t i = 0; i < flags.size(); ++i) {
            if (!flags[i]) continue;
            ctx.report.flagged_sessions.push_back({test_tensor.keys[i].first,
                                                   test_tensor.keys[i].second, errors[i],
                                                   test_tensor.labels[i]});
        }
        ctx.report.models.push_back(std::move(block));
    });
    return std::move(ctx.report);
}

RunReport run_pipeline(const PipelineConfig& config) {
    switch (config.domain) {
    case Domain::intrusion: return run_intrusion(config);
    case Domain::malware: return run_malware(config);
    case Domain::phishing: return run_phishing(config);
    case Domain::ueba: return run_ueba(config);
    }
    throw ConfigError("unknown domain");
}

std::vector<std::filesystem::path> generate_dataset(const PipelineConfig& config) {
    std::error_code ec;
    std::filesystem::create_directories(config.out_dir, ec);
    if (ec) throw DataError("cannot create output directory " + config.out_dir.string());
    std::vector<std::filesystem::path> out;
    switch (config.domain) {
    case Domain::intrusion:
        out.push_back(config.out_dir / "flows.csv");
        save_dataset(synth::generate_network_flows(config.generator).data, out.back());
        break;
    case Domain::malware:
        out.push_back(config.out_dir / "files.csv");
        save_dataset(synth::generate_malware_corpus(config.generator).data, out.back());
        break;
    case Domain::phishing:
        out.push_back(config.out_dir / "emails.csv");
        save_dataset(synth::generate_email_corpus(config.generator).data, out.back());
        break;
    case Domain::ueba: {
        const auto activity = synth::generate_user_activity(config.generator);
        out.push_back(config.out_dir / "events.csv");
        save_dataset(activity.events, out.back());
        out.push_back(config.out_dir / "events.jsonl");
        synth::save_event_log(activity.events, out.back());
        break;
    }
    }
    return out;
}

} // namespace threatbench::pipeline
