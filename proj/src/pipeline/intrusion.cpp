#include <algorithm>
#include <numeric>
#include <sstream>

#include "common.hpp"
#include "threatbench/core/split.hpp"
#include "threatbench/forest/isolation.hpp"
#include "threatbench/neural/dense_autoencoder.hpp"
#include "threatbench/neural/threshold.hpp"
#include "threatbench/pipeline/pipeline.hpp"
#include "threatbench/preprocess/encode.hpp"

namespace threatbench::pipeline {

using namespace detail;

RunReport run_intrusion(const PipelineConfig& config) {
    RunContext ctx(config);
    const std::string label = "anomaly_label";

    const auto generated = ctx.stage("generate", [&] {
        auto flows = synth::generate_network_flows(config.generator);
        std::ostringstream csv;
        write_dataset(flows.data, csv);
        ctx.write_artifact("flows", "data/flows.csv", csv.str());
        return flows.data;
    });
    const Labels y_all = generated.labels(label);

    const auto split = ctx.stage("split", [&] {
        return stratified_split_indices(y_all, config.preprocess.test_fraction,
                                        ctx.root.child("split"));
    });
    ctx.set_test_rows(split.test);
    const Labels y_train = gather(y_all, split.train);
    const Labels y_test = gather(y_all, split.test);
    ctx.report.dataset = summarize(generated, "flow", generated.rows(), count_positive(y_all),
                                   split.train.size(), count_positive(y_train), split.test.size(),
                                   count_positive(y_test), config.histogram_bins);

    const auto features = ctx.stage("log_transform", [&] {
        return log1p_columns(generated, config.preprocess.log_columns);
    });

    const auto encoded = ctx.stage("fit_encoder", [&] {
        const std::vector<std::string> cats{"protocol"};
        const auto spec = preprocess::fit_one_hot(features.select_rows(split.train), cats);
        ctx.audit("fit_encoder", split.train);
        return preprocess::apply_one_hot(spec, features);
    });

    const auto scaled = ctx.stage("fit_scaler", [&] {
        const auto cols = numeric_columns(encoded);
        const auto spec = preprocess::fit_scaler(encoded.select_rows(split.train), cols);
        ctx.audit("fit_scaler", split.train);
        return preprocess::apply_scaler(spec, encoded);
    });

    const auto names = scaled.feature_names();
    const Matrix X_train = scaled.select_rows(split.train).to_matrix(names);
    const Matrix X_test = scaled.select_rows(split.test).to_matrix(names);

    std::vector<std::size_t> clean_pos;
    for (std::size_t i = 0; i < y_train.size(); ++i) {
        if (y_train[i] == 0) clean_pos.push_back(i);
    }
    const auto clean_ids = compose(split.train, clean_pos);
    const Matrix X_clean = X_train.select_rows(clean_pos);

    // Isolation Forest: unsupervised on every training flow.
    const auto iforest = ctx.stage("fit_isolation_forest", [&] {
        const auto psi = std::min(config.models.isolation.psi, X_train.rows());
        auto model = forest::fit_isolation_forest(X_train, config.models.isolation.n_trees, psi,
                                                  ctx.root.child("isolation_forest"));
        ctx.audit("fit_isolation_forest", split.train);
        ctx.write_artifact("isolation_forest", "models/isolation_forest.json",
                           dump_model(model.to_json()));
        return model;
    });
    const auto if_threshold = ctx.stage("calibrate_isolation_threshold", [&] {
        const auto scores = iforest.score(X_train);
        ctx.audit("calibrate_isolation_threshold", split.train);
        return neural::calibrate_threshold(scores, config.threshold_percentile);
    });

    // Dense autoencoder: clean training flows only.
    const auto ae = ctx.stage("fit_dense_autoencoder", [&] {
        auto fit = neural::fit_dense_autoencoder(X_clean, config.models.dense,
                                                 ctx.root.child("dense_autoencoder"));
        ctx.audit("fit_dense_autoencoder", clean_ids);
        ctx.write_artifact("dense_autoencoder", "models/dense_autoencoder.json",
                           dump_model(fit.model.to_json()));
        return fit;
    });
    const auto ae_threshold = ctx.stage("calibrate_autoencoder_threshold", [&] {
        const auto errors = neural::reconstruction_errors(ae.model, X_clean);
        ctx.audit("calibrate_autoencoder_threshold", clean_ids);
        return neural::calibrate_threshold(errors, config.threshold_percentile);
    });

    ctx.stage("evaluate", [&] {
        const auto if_scores = iforest.score(X_test);
        auto if_block = score_block("isolation_forest", y_test, if_scores, if_threshold.value,
                                    true, "attack", "normal");
        if_block.threshold = if_threshold;
        if_block.model_file = "models/isolation_forest.json";
        if_block.training = {{"n_trees", iforest.trees.size()},
                             {"psi", iforest.psi},
                             {"height_limit", iforest.height_limit}};

        const auto ae_errors = neural::reconstruction_errors(ae.model, X_test);
        auto ae_block = score_block("dense_autoencoder", y_test, ae_errors, ae_threshold.value,
                                    true, "attack", "normal");
        ae_block.threshold = ae_threshold;
        ae_block.model_file = "models/dense_autoencoder.json";
        ae_block.training = {{"layer_sizes", ae.model.layer_sizes}, {"train_loss", ae.log.train}};

        evalx::ImportanceOptions opts;
        opts.metric = evalx::Metric::auc;
        opts.repeats = config.importance_repeats;
        const auto importance = ctx.root.child("importance");
        attach_importances(
            if_block, evalx::permutation_importance(
                          [&](const Matrix& X) { return iforest.score(X, Exec::serial); }, X_test,
                          y_test, names, opts, importance.child("isolation_forest")));
        attach_importances(
            ae_block,
            evalx::permutation_importance(
                [&](const Matrix& X) {
                    return neural::reconstruction_errors(ae.model, X, Exec::serial);
                },
                X_test, y_test, names, opts, importance.child("dense_autoencoder")));
        ctx.report.models.push_back(std::move(if_block));
        ctx.report.models.push_back(std::move(ae_block));
    });
    return std::move(ctx.report);
}

} // namespace threatbench::pipeline
