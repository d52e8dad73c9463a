#include "threatbench/evalx/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "threatbench/core/error.hpp"

namespace threatbench::evalx {

ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred) {
    if (y_true.size() != y_pred.size()) throw DataError("confusion: length mismatch");
    if (y_true.empty()) throw DataError("confusion: empty input");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const int t = y_true[i];
        const int p = y_pred[i];
        if ((t != 0 && t != 1) || (p != 0 && p != 1)) {
            throw DataError("confusion: labels must be 0 or 1");
        }
        if (t == 1) {
            (p == 1 ? cm.tp : cm.fn) += 1;
        } else {
            (p == 1 ? cm.fp : cm.tn) += 1;
        }
    }
    return cm;
}

double f1_score(double precision, double recall) {
    const double sum = precision + recall;
    return sum > 0.0 ? 2.0 * precision * recall / sum : 0.0;
}

namespace {

double ratio(std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

ClassMetrics class_metrics(std::size_t tp, std::size_t fp, std::size_t fn) {
    ClassMetrics m;
    m.precision = ratio(tp, tp + fp);
    m.recall = ratio(tp, tp + fn);
    m.f1 = f1_score(m.precision, m.recall);
    m.support = tp + fn;
    return m;
}

} // namespace

MetricsReport classification_report(const ConfusionMatrix& cm, std::optional<double> auc,
                                    std::string positive_class, std::string negative_class) {
    MetricsReport r;
    r.positive_class = std::move(positive_class);
    r.negative_class = std::move(negative_class);
    r.confusion = cm;
    r.accuracy = ratio(cm.tp + cm.tn, cm.total());
    r.positive = class_metrics(cm.tp, cm.fp, cm.fn);
    r.negative = class_metrics(cm.tn, cm.fn, cm.fp);
    r.macro_f1 = (r.positive.f1 + r.negative.f1) / 2.0;
    r.roc_auc = auc;
    return r;
}

MetricsReport classification_report(std::span<const int> y_true, std::span<const int> y_pred,
                                    std::optional<std::span<const double>> scores,
                                    std::string positive_class, std::string negative_class) {
    std::optional<double> auc;
    if (scores) auc = roc_auc(*scores, y_true);
    return classification_report(confusion(y_true, y_pred), auc, std::move(positive_class),
                                 std::move(negative_class));
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) throw DataError("roc_auc: length mismatch");
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    for (double s : scores) {
        if (!std::isfinite(s)) throw DataError("roc_auc: non-finite score");
    }
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    double n_pos = 0.0;
    double rank_sum = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        // ranks i+1 .. j share their mean
        const double mid = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k) {
            const int y = labels[order[k]];
            if (y != 0 && y != 1) throw DataError("roc_auc: labels must be 0 or 1");
            if (y == 1) {
                n_pos += 1.0;
                rank_sum += mid;
            }
        }
        i = j;
    }
    const double n_neg = static_cast<double>(scores.size()) - n_pos;
    if (n_pos == 0.0 || n_neg == 0.0) throw DataError("roc_auc: labels need both classes");
    return (rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

nlohmann::json to_json(const ConfusionMatrix& cm) {
    return {{"tp", cm.tp}, {"fp", cm.fp}, {"fn", cm.fn}, {"tn", cm.tn}};
}

ConfusionMatrix confusion_from_json(const nlohmann::json& doc) {
    return {doc.at("tp").get<std::size_t>(), doc.at("fp").get<std::size_t>(),
            doc.at("fn").get<std::size_t>(), doc.at("tn").get<std::size_t>()};
}

namespace {

nlohmann::json class_json(const ClassMetrics& m) {
    return {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"support", m.support}};
}

ClassMetrics class_from_json(const nlohmann::json& doc) {
    return {doc.at("precision").get<double>(), doc.at("recall").get<double>(),
            doc.at("f1").get<double>(), doc.at("support").get<std::size_t>()};
}

} // namespace

nlohmann::json to_json(const MetricsReport& r) {
    nlohmann::json doc;
    doc["positive_class"] = r.positive_class;
    doc["negative_class"] = r.negative_class;
    doc["accuracy"] = r.accuracy;
    doc["per_class"] = {{r.positive_class, class_json(r.positive)},
                        {r.negative_class, class_json(r.negative)}};
    doc["macro_f1"] = r.macro_f1;
    doc["roc_auc"] = r.roc_auc ? nlohmann::json(*r.roc_auc) : nlohmann::json(nullptr);
    doc["confusion"] = to_json(r.confusion);
    return doc;
}

MetricsReport metrics_from_json(const nlohmann::json& doc) {
    MetricsReport r;
    r.positive_class = doc.at("positive_class").get<std::string>();
    r.negative_class = doc.at("negative_class").get<std::string>();
    r.accuracy = doc.at("accuracy").get<double>();
    r.positive = class_from_json(doc.at("per_class").at(r.positive_class));
    r.negative = class_from_json(doc.at("per_class").at(r.negative_class));
    r.macro_f1 = doc.at("macro_f1").get<double>();
    if (!doc.at("roc_auc").is_null()) r.roc_auc = doc.at("roc_auc").get<double>();
    r.confusion = confusion_from_json(doc.at("confusion"));
    return r;
}

} // namespace threatbench::evalx
