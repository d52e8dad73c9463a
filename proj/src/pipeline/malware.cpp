#include <sstream>

#include "common.hpp"
#include "threatbench/core/split.hpp"
#include "threatbench/forest/boosting.hpp"
#include "threatbench/forest/random_forest.hpp"
#include "threatbench/linear/platt.hpp"
#include "threatbench/pipeline/pipeline.hpp"
#include "threatbench/preprocess/encode.hpp"
#include "threatbench/preprocess/smote.hpp"

namespace threatbench::pipeline {

using namespace detail;

RunReport run_malware(const PipelineConfig& config) {
    RunContext ctx(config);
    const std::string label = "label";

    const auto generated = ctx.stage("generate", [&] {
        auto corpus = synth::generate_malware_corpus(config.generator);
        std::ostringstream csv;
        write_dataset(corpus.data, csv);
        ctx.write_artifact("files", "data/files.csv", csv.str());
        return corpus.data;
    });
    const Labels y_all = generated.labels(label);

    const auto split = ctx.stage("split", [&] {
        return stratified_split_indices(y_all, config.preprocess.test_fraction,
                                        ctx.root.child("split"));
    });
    ctx.set_test_rows(split.test);
    const Labels y_train = gather(y_all, split.train);
    const Labels y_test = gather(y_all, split.test);
    ctx.report.dataset = summarize(generated, "file", generated.rows(), count_positive(y_all),
                                   split.train.size(), count_positive(y_train), split.test.size(),
                                   count_positive(y_test), config.histogram_bins);

    const auto encoded = ctx.stage("fit_encoder", [&] {
        const std::vector<std::string> cats{"file_type"};
        const auto spec = preprocess::fit_one_hot(generated.select_rows(split.train), cats);
        ctx.audit("fit_encoder", split.train);
        return preprocess::apply_one_hot(spec, generated);
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

    const auto holdout = ctx.stage("validation_split", [&] {
        return stratified_split_indices(y_train, config.preprocess.validation_fraction,
                                        ctx.root.child("validation"));
    });
    const auto fit_ids = compose(split.train, holdout.train);
    const auto valid_ids = compose(split.train, holdout.test);
    Matrix X_fit = X_train.select_rows(holdout.train);
    Labels y_fit = gather(y_train, holdout.train);
    const Matrix X_valid = X_train.select_rows(holdout.test);
    const Labels y_valid = gather(y_train, holdout.test);

    ctx.stage("smote", [&] {
        std::vector<std::size_t> minority_pos;
        for (std::size_t i = 0; i < y_fit.size(); ++i) {
            if (y_fit[i] == 1) minority_pos.push_back(i);
        }
        const std::size_t majority = y_fit.size() - minority_pos.size();
        const std::size_t deficit = majority > minority_pos.size() ? majority - minority_pos.size() : 0;
        const auto result = preprocess::smote_oversample(
            X_fit.select_rows(minority_pos), config.preprocess.smote_k, deficit,
            ctx.root.child("smote"));
        ctx.audit("smote", compose(fit_ids, minority_pos));
        X_fit.append_rows(result.samples);
        y_fit.insert(y_fit.end(), result.samples.rows(), 1);
    });

    const auto rf = ctx.stage("fit_random_forest", [&] {
        auto model = forest::fit_random_forest(X_fit, y_fit, config.models.forest,
                                               ctx.root.child("random_forest"));
        ctx.audit("fit_random_forest", fit_ids);
        ctx.write_artifact("random_forest", "models/random_forest.json",
                           dump_model(model.to_json()));
        return model;
    });

    const auto gb = ctx.stage("fit_gradient_boosting", [&] {
        auto model = forest::fit_gradient_boosting(X_fit, y_fit, config.models.boosting, X_valid,
                                                   y_valid, ctx.root.child("boosting"));
        std::vector<std::size_t> used = fit_ids;
        used.insert(used.end(), valid_ids.begin(), valid_ids.end());
        ctx.audit("fit_gradient_boosting", used);
        ctx.write_artifact("gradient_boosting", "models/gradient_boosting.json",
                           dump_model(model.to_json()));
        return model;
    });

    std::optional<linear::CalibratorSpec> calibrator;
    if (config.models.calibrate_boosting) {
        calibrator = ctx.stage("calibrate_boosting", [&] {
            auto spec = linear::fit_platt(gb.predict_margin(X_valid), y_valid);
            ctx.audit("calibrate_boosting", valid_ids);
            ctx.write_artifact("boosting_calibration", "models/boosting_calibration.json",
                               dump_model(spec.to_json()));
            return spec;
        });
    }

    ctx.stage("evaluate", [&] {
        auto gb_scores = [&](const Matrix& X) {
            auto m = gb.predict_margin(X);
            if (calibrator) return calibrator->apply(m);
            for (double& v : m) v = forest::sigmoid(v);
            return m;
        };
        auto rf_scores = [&](const Matrix& X) { return rf.predict_proba(X, Exec::serial); };

        auto rf_block = score_block("random_forest", y_test, rf_scores(X_test), 0.5, false,
                                    "malware", "benign");
        rf_block.model_file = "models/random_forest.json";
        rf_block.training = {{"n_trees", rf.trees.size()},
                             {"features_per_split", rf.features_per_split},
                             {"fit_rows", X_fit.rows()}};

        auto gb_block = score_block("gradient_boosting", y_test, gb_scores(X_test), 0.5, false,
                                    "malware", "benign");
        gb_block.model_file = "models/gradient_boosting.json";
        gb_block.calibration = calibrator;
        gb_block.training = {{"best_iteration", gb.best_iteration},
                             {"train_loss", gb.train_loss},
                             {"valid_loss", gb.valid_loss}};

        evalx::ImportanceOptions opts;
        opts.metric = evalx::Metric::auc;
        opts.repeats = config.importance_repeats;
        const auto importance = ctx.root.child("importance");
        attach_importances(rf_block, evalx::permutation_importance(rf_scores, X_test, y_test, names,
                                                                   opts, importance.child("rf")));
        attach_importances(gb_block, evalx::permutation_importance(gb_scores, X_test, y_test, names,
                                                                   opts, importance.child("gb")));
        ctx.report.models.push_back(std::move(rf_block));
        ctx.report.models.push_back(std::move(gb_block));
    });
    return std::move(ctx.report);
}

} // namespace threatbench::pipeline
