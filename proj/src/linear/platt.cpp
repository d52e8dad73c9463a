#include "threatbench/linear/platt.hpp"

#include <algorithm>
#include <cmath>

#include "threatbench/core/error.hpp"
#include "threatbench/core/numeric.hpp"

namespace threatbench::linear {

double CalibratorSpec::apply(double score) const { return logistic(A * score + B); }

std::vector<double> CalibratorSpec::apply(std::span<const double> scores) const {
    std::vector<double> out(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) out[i] = apply(scores[i]);
    return out;
}

nlohmann::json CalibratorSpec::to_json() const {
    return {{"model", "platt"}, {"format_version", 1}, {"A", A}, {"B", B}};
}

CalibratorSpec CalibratorSpec::from_json(const nlohmann::json& doc) {
    if (doc.value("model", "") != "platt") throw DataError("not a Platt calibrator");
    return {doc.at("A").get<double>(), doc.at("B").get<double>()};
}

CalibratorSpec fit_platt(std::span<const double> scores, std::span<const int> labels,
                         const PlattConfig& config) {
    if (scores.size() != labels.size()) throw DataError("platt: score and label counts differ");
    double n_pos = 0.0;
    double n_neg = 0.0;
    for (int v : labels) {
        if (v == 1) {
            n_pos += 1.0;
        } else if (v == 0) {
            n_neg += 1.0;
        } else {
            throw DataError("platt: labels must be 0 or 1");
        }
    }
    if (n_pos == 0.0 || n_neg == 0.0) throw DataError("platt: labels need both classes");
    for (double s : scores) {
        if (!std::isfinite(s)) throw DataError("platt: non-finite score");
    }

    const double t_pos = (n_pos + 1.0) / (n_pos + 2.0);
    const double t_neg = 1.0 / (n_neg + 2.0);
    const auto n = static_cast<double>(scores.size());

    double mean = 0.0;
    for (double s : scores) mean += s;
    mean /= n;
    double var = 0.0;
    for (double s : scores) var += (s - mean) * (s - mean);
    const double sd = var > 0.0 ? std::sqrt(var / n) : 1.0;

    std::vector<double> z(scores.size());
    std::vector<double> t(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        z[i] = (scores[i] - mean) / sd;
        t[i] = labels[i] == 1 ? t_pos : t_neg;
    }

    double a = 0.0;
    double b = 0.0;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        double ga = 0.0;
        double gb = 0.0;
        for (std::size_t i = 0; i < z.size(); ++i) {
            const double r = logistic(a * z[i] + b) - t[i];
            ga += r * z[i];
            gb += r;
        }
        ga /= n;
        gb /= n;
        if (std::max(std::abs(ga), std::abs(gb)) < 1e-6) break;
        a -= config.step_size * ga;
        b -= config.step_size * gb;
    }
    if (!std::isfinite(a) || !std::isfinite(b)) throw NumericError("platt: non-finite parameters");
    return {a / sd, b - a * mean / sd};
}

} // namespace threatbench::linear
