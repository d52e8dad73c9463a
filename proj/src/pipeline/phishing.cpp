#include <sstream>

#include "common.hpp"
#include "threatbench/core/split.hpp"
#include "threatbench/forest/boosting.hpp"
#include "threatbench/forest/random_forest.hpp"
#include "threatbench/linear/logistic.hpp"
#include "threatbench/linear/platt.hpp"
#include "threatbench/pipeline/pipeline.hpp"
#include "threatbench/preprocess/encode.hpp"
#include "threatbench/preprocess/resample.hpp"

namespace threatbench::pipeline {

using namespace detail;

RunReport run_phishing(const PipelineConfig& config) {
    RunContext ctx(config);
    const std::string label = "label";

    const auto generated = ctx.stage("generate", [&] {
        auto corpus = synth::generate_email_corpus(config.generator);
        std::ostringstream csv;
        write_dataset(corpus.data, csv);
        ctx.write_artifact("emails", "data/emails.csv", csv.str());
        return corpus.data;
    });
    const Labels y_all = generated.labels(label);

    const auto split = ctx.stage("split", [&] {
        return stratified_split_indices(y_all, config.preprocess.test_fraction,
                                        ctx.root.child("split"));
    });
    ctx.set_test_rows(split.test);
    const Labels y_train_full = gather(y_all, split.train);
    const Labels y_test = gather(y_all, split.test);

    const auto train_ids = ctx.stage("downsample", [&] {
        const auto kept = preprocess::downsample_indices(
            y_train_full, config.preprocess.downsample_ratio, ctx.root.child("downsample"));
        ctx.audit("downsample", split.train);
        return compose(split.train, kept);
    });
    const Labels y_train = gather(y_all, train_ids);
    ctx.report.dataset = summarize(generated, "email", generated.rows(), count_positive(y_all),
                                   train_ids.size(), count_positive(y_train), split.test.size(),
                                   count_positive(y_test), config.histogram_bins);

    const auto encoded = ctx.stage("fit_encoder", [&] {
        const std::vector<std::string> cats{"attachment_type"};
        const auto spec = preprocess::fit_one_hot(generated.select_rows(train_ids), cats);
        ctx.audit("fit_encoder", train_ids);
        return preprocess::apply_one_hot(spec, generated);
    });
    const auto scaled = ctx.stage("fit_scaler", [&] {
        const auto cols = numeric_columns(encoded);
        const auto spec = preprocess::fit_scaler(encoded.select_rows(train_ids), cols);
        ctx.audit("fit_scaler", train_ids);
        return preprocess::apply_scaler(spec, encoded);
    });

    const auto names = scaled.feature_names();
    const Matrix X_train = scaled.select_rows(train_ids).to_matrix(names);
    const Matrix X_test = scaled.select_rows(split.test).to_matrix(names);

    const auto holdout = ctx.stage("validation_split", [&] {
        return stratified_split_indices(y_train, config.preprocess.validation_fraction,
                                        ctx.root.child("validation"));
    });
    const auto fit_ids = compose(train_ids, holdout.train);
    const auto valid_ids = compose(train_ids, holdout.test);
    const Matrix X_fit = X_train.select_rows(holdout.train);
    const Labels y_fit = gather(y_train, holdout.train);
    const Matrix X_valid = X_train.select_rows(holdout.test);
    const Labels y_valid = gather(y_train, holdout.test);
    std::vector<std::size_t> fit_and_valid = fit_ids;
    fit_and_valid.insert(fit_and_valid.end(), valid_ids.begin(), valid_ids.end());

    const auto lr = ctx.stage("fit_logistic", [&] {
        auto fit = linear::fit_logistic(X_fit, y_fit, config.models.logistic);
        ctx.audit("fit_logistic", fit_ids);
        ctx.write_artifact("logistic", "models/logistic.json", dump_model(fit.model.to_json()));
        return fit;
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
        ctx.audit("fit_gradient_boosting", fit_and_valid);
        ctx.write_artifact("gradient_boosting", "models/gradient_boosting.json",
                           dump_model(model.to_json()));
        return model;
    });

    std::optional<linear::CalibratorSpec> gb_cal;
    std::optional<linear::CalibratorSpec> lr_cal;
    if (config.models.calibrate_boosting) {
        gb_cal = ctx.stage("calibrate_boosting", [&] {
            auto spec = linear::fit_platt(gb.predict_margin(X_valid), y_valid);
            ctx.audit("calibrate_boosting", valid_ids);
            ctx.write_artifact("boosting_calibration", "models/boosting_calibration.json",
                               dump_model(spec.to_json()));
            return spec;
        });
    }
    if (config.models.calibrate_logistic) {
        lr_cal = ctx.stage("calibrate_logistic", [&] {
            std::vector<double> margins(X_valid.rows());
            for (std::size_t r = 0; r < X_valid.rows(); ++r) {
                margins[r] = lr.model.predict_logit(X_valid.row(r));
            }
            auto spec = linear::fit_platt(margins, y_valid);
            ctx.audit("calibrate_logistic", valid_ids);
            ctx.write_artifact("logistic_calibration", "models/logistic_calibration.json",
                               dump_model(spec.to_json()));
            return spec;
        });
    }

    ctx.stage("evaluate", [&] {
        auto lr_scores = [&](const Matrix& X) {
            std::vector<double> out(X.rows());
            for (std::size_t r = 0; r < X.rows(); ++r) {
                const double m = lr.model.predict_logit(X.row(r));
                out[r] = lr_cal ? lr_cal->apply(m) : forest::sigmoid(m);
            }
            return out;
        };
        auto rf_scores = [&](const Matrix& X) { return rf.predict_proba(X, Exec::serial); };
        auto gb_scores = [&](const Matrix& X) {
            auto m = gb.predict_margin(X);
            if (gb_cal) return gb_cal->apply(m);
            for (double& v : m) v = forest::sigmoid(v);
            return m;
        };

        auto lr_block = score_block("logistic_regression", y_test, lr_scores(X_test), 0.5, false,
                                    "phishing", "legitimate");
        lr_block.model_file = "models/logistic.json";
        lr_block.calibration = lr_cal;
        lr_block.training = {{"epochs_run", lr.loss.size() - 1},
                             {"final_loss", lr.loss.back()},
                             {"class_weights", lr.model.class_weights}};

        auto rf_block = score_block("random_forest", y_test, rf_scores(X_test), 0.5, false,
                                    "phishing", "legitimate");
        rf_block.model_file = "models/random_forest.json";
        rf_block.training = {{"n_trees", rf.trees.size()},
                             {"features_per_split", rf.features_per_split}};

        auto gb_block = score_block("gradient_boosting", y_test, gb_scores(X_test), 0.5, false,
                                    "phishing", "legitimate");
        gb_block.model_file = "models/gradient_boosting.json";
        gb_block.calibration = gb_cal;
        gb_block.training = {{"best_iteration", gb.best_iteration},
                             {"train_loss", gb.train_loss},
                             {"valid_loss", gb.valid_loss}};

        evalx::ImportanceOptions opts;
        opts.metric = evalx::Metric::auc;
        opts.repeats = config.importance_repeats;
        const auto importance = ctx.root.child("importance");
        attach_importances(lr_block, evalx::permutation_importance(lr_scores, X_test, y_test, names,
                                                                   opts, importance.child("lr")));
        attach_importances(rf_block, evalx::permutation_importance(rf_scores, X_test, y_test, names,
                                                                   opts, importance.child("rf")));
        attach_importances(gb_block, evalx::permutation_importance(gb_scores, X_test, y_test, names,
                                                                   opts, importance.child("gb")));
        ctx.report.models.push_back(std::move(lr_block));
        ctx.report.models.push_back(std::move(rf_block));
        ctx.report.models.push_back(std::move(gb_block));
    });
    return std::move(ctx.report);
}

} // namespace threatbench::pipeline
