#include "threatbench/neural/dense_autoencoder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "threatbench/core/error.hpp"

namespace threatbench::neural {

namespace {

std::size_t param_count(std::span<const std::size_t> sizes) {
    std::size_t total = 0;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) total += sizes[l + 1] * (sizes[l] + 1);
    return total;
}

/// Activations of every layer; acts[0] is the input.
std::vector<std::vector<double>> forward(const DenseAutoencoder& model, std::span<const double> x) {
    const auto& sizes = model.layer_sizes;
    std::vector<std::vector<double>> acts(sizes.size());
    acts[0].assign(x.begin(), x.end());
    for (std::size_t l = 0; l < model.n_layers(); ++l) {
        const std::size_t in = sizes[l];
        const std::size_t out = sizes[l + 1];
        const double* W = model.params.data() + model.weight_offset(l);
        const double* b = W + out * in;
        auto& a = acts[l + 1];
        a.resize(out);
        const bool hidden = l + 1 < model.n_layers();
        for (std::size_t o = 0; o < out; ++o) {
            double z = b[o];
            const double* w = W + o * in;
            for (std::size_t i = 0; i < in; ++i) z += w[i] * acts[l][i];
            a[o] = hidden ? std::tanh(z) : z;
        }
    }
    return acts;
}

} // namespace

std::size_t DenseAutoencoder::weight_offset(std::size_t layer) const {
    std::size_t off = 0;
    for (std::size_t l = 0; l < layer; ++l) off += layer_sizes[l + 1] * (layer_sizes[l] + 1);
    return off;
}

std::vector<double> DenseAutoencoder::reconstruct(std::span<const double> x) const {
    if (x.size() != input_dim()) throw DataError("autoencoder: feature width mismatch");
    return std::move(forward(*this, x).back());
}

double DenseAutoencoder::weight_l1() const {
    double sum = 0.0;
    for (std::size_t l = 0; l < n_layers(); ++l) {
        const std::size_t off = weight_offset(l);
        const std::size_t count = layer_sizes[l + 1] * layer_sizes[l];
        for (std::size_t i = 0; i < count; ++i) sum += std::abs(params[off + i]);
    }
    return sum;
}

nlohmann::json DenseAutoencoder::to_json() const {
    return {{"model", "dense_autoencoder"},
            {"format_version", 1},
            {"layer_sizes", layer_sizes},
            {"activation", "tanh"},
            {"l1", l1},
            {"params", params}};
}

DenseAutoencoder DenseAutoencoder::from_json(const nlohmann::json& doc) {
    if (doc.value("model", "") != "dense_autoencoder") {
        throw DataError("not a dense autoencoder model");
    }
    DenseAutoencoder model;
    model.layer_sizes = doc.at("layer_sizes").get<std::vector<std::size_t>>();
    check_symmetric(model.layer_sizes);
    model.l1 = doc.at("l1").get<double>();
    model.params = doc.at("params").get<std::vector<double>>();
    if (model.params.size() != param_count(model.layer_sizes)) {
        throw DataError("dense autoencoder: parameter count does not match layer sizes");
    }
    return model;
}

std::vector<std::size_t> default_dense_layers(std::size_t d) {
    const std::size_t h1 = std::max<std::size_t>(8, d / 2);
    const std::size_t z = std::max<std::size_t>(4, d / 4);
    return {d, h1, z, h1, d};
}

void check_symmetric(std::span<const std::size_t> sizes) {
    if (sizes.size() < 3) throw ConfigError("autoencoder: need at least one hidden layer");
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        if (sizes[i] == 0) throw ConfigError("autoencoder: layer sizes must be positive");
        if (sizes[i] != sizes[sizes.size() - 1 - i]) {
            throw ConfigError("autoencoder: layer sizes must be symmetric");
        }
    }
}

DenseAutoencoder init_dense_autoencoder(std::vector<std::size_t> layer_sizes, double l1,
                                        RngStream rng) {
    check_symmetric(layer_sizes);
    if (l1 < 0.0) throw ConfigError("autoencoder: l1 must be non-negative");
    DenseAutoencoder model;
    model.layer_sizes = std::move(layer_sizes);
    model.l1 = l1;
    model.params.assign(param_count(model.layer_sizes), 0.0);
    for (std::size_t l = 0; l < model.n_layers(); ++l) {
        const std::size_t in = model.layer_sizes[l];
        const std::size_t out = model.layer_sizes[l + 1];
        const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
        const std::size_t off = model.weight_offset(l);
        for (std::size_t i = 0; i < in * out; ++i) model.params[off + i] = rng.uniform(-limit, limit);
    }
    return model;
}

double dense_objective(const DenseAutoencoder& model, const Matrix& X,
                       std::span<const std::size_t> rows, std::vector<double>* grad) {
    if (X.cols() != model.input_dim()) throw DataError("autoencoder: feature width mismatch");
    if (rows.empty()) throw DataError("autoencoder: empty batch");
    const auto& sizes = model.layer_sizes;
    const std::size_t d = model.input_dim();
    const double norm = 1.0 / static_cast<double>(rows.size() * d);
    if (grad) grad->resize(model.params.size(), 0.0);

    double sq = 0.0;
    std::vector<double> delta;
    std::vector<double> prev;
    for (std::size_t r : rows) {
        const auto x = X.row(r);
        const auto acts = forward(model, x);
        const auto& out = acts.back();
        delta.resize(d);
        for (std::size_t j = 0; j < d; ++j) {
            const double e = out[j] - x[j];
            sq += e * e;
            delta[j] = 2.0 * e * norm;
        }
        if (!grad) continue;
        for (std::size_t l = model.n_layers(); l-- > 0;) {
            const std::size_t in = sizes[l];
            const std::size_t o_n = sizes[l + 1];
            const std::size_t off = model.weight_offset(l);
            const double* W = model.params.data() + off;
            double* gW = grad->data() + off;
            double* gb = gW + o_n * in;
            const auto& a = acts[l];
            for (std::size_t o = 0; o < o_n; ++o) {
                const double dl = delta[o];
                for (std::size_t i = 0; i < in; ++i) gW[o * in + i] += dl * a[i];
                gb[o] += dl;
            }
            if (l == 0) break;
            prev.assign(in, 0.0);
            for (std::size_t o = 0; o < o_n; ++o) {
                const double dl = delta[o];
                for (std::size_t i = 0; i < in; ++i) prev[i] += W[o * in + i] * dl;
            }
            for (std::size_t i = 0; i < in; ++i) prev[i] *= 1.0 - a[i] * a[i];
            delta.swap(prev);
        }
    }

    double loss = sq * norm;
    if (model.l1 > 0.0) {
        loss += model.l1 * model.weight_l1();
        if (grad) {
            for (std::size_t l = 0; l < model.n_layers(); ++l) {
                const std::size_t off = model.weight_offset(l);
                const std::size_t count = sizes[l + 1] * sizes[l];
                for (std::size_t i = 0; i < count; ++i) {
                    const double w = model.params[off + i];
                    (*grad)[off + i] += model.l1 * static_cast<double>((w > 0.0) - (w < 0.0));
                }
            }
        }
    }
    return loss;
}

DenseFit fit_dense_autoencoder(const Matrix& X, const DenseConfig& config, const RngStream& rng,
                               const Matrix& X_valid) {
    if (X.rows() == 0) throw DataError("autoencoder: empty training input");
    if (config.epochs < 0) throw ConfigError("autoencoder: epochs must be non-negative");
    if (config.batch_size == 0) throw ConfigError("autoencoder: batch_size must be positive");
    auto sizes = config.layer_sizes.empty() ? default_dense_layers(X.cols()) : config.layer_sizes;
    if (sizes.front() != X.cols()) throw ConfigError("autoencoder: input size must equal width");

    DenseFit fit;
    fit.model = init_dense_autoencoder(std::move(sizes), config.l1, rng.child("init"));
    auto& model = fit.model;
    Adam adam(model.params.size(), {.step_size = config.step_size});

    std::vector<std::size_t> all(X.rows());
    std::iota(all.begin(), all.end(), 0);
    std::vector<std::size_t> valid_rows(X_valid.rows());
    std::iota(valid_rows.begin(), valid_rows.end(), 0);

    std::vector<double> grad;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::vector<std::size_t> order = all;
        RngStream epoch_rng = rng.child("epoch", static_cast<std::uint64_t>(epoch));
        epoch_rng.shuffle(order);
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            grad.assign(model.params.size(), 0.0);
            dense_objective(model, X, std::span(order).subspan(start, end - start), &grad);
            adam.step(model.params, grad);
        }
        const double loss = dense_objective(model, X, all, nullptr);
        if (!std::isfinite(loss)) throw NumericError("autoencoder: non-finite training loss");
        fit.log.train.push_back(loss);
        if (!valid_rows.empty()) {
            fit.log.valid.push_back(dense_objective(model, X_valid, valid_rows, nullptr));
        }
    }
    return fit;
}

std::vector<double> reconstruction_errors(const DenseAutoencoder& model, const Matrix& X,
                                          Exec exec) {
    if (X.cols() != model.input_dim()) throw DataError("autoencoder: feature width mismatch");
    std::vector<double> out(X.rows());
    const auto d = static_cast<double>(X.cols());
    for_each_index(exec, X.rows(), [&](std::size_t r) {
        const auto x = X.row(r);
        const auto y = model.reconstruct(x);
        double sum = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) sum += (y[j] - x[j]) * (y[j] - x[j]);
        out[r] = sum / d;
    });
    return out;
}

} // namespace threatbench::neural
