#include "threatbench/neural/lstm_autoencoder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "threatbench/core/error.hpp"
#include "threatbench/core/numeric.hpp"

namespace threatbench::neural {

using preprocess::SessionTensor;

LstmLayout::LstmLayout(std::size_t f, std::size_t h, std::size_t z)
    : features(f), hidden(h), latent(z) {
    std::size_t off = 0;
    auto take = [&](std::size_t n) {
        const std::size_t at = off;
        off += n;
        return at;
    };
    enc_W = take(4 * h * f);
    enc_U = take(4 * h * h);
    enc_b = take(4 * h);
    lat_W = take(z * h);
    lat_b = take(z);
    dec_W = take(4 * h * z);
    dec_U = take(4 * h * h);
    dec_b = take(4 * h);
    out_W = take(f * h);
    out_b = take(f);
    total = off;
}

nlohmann::json LstmAutoencoder::to_json() const {
    return {{"model", "lstm_autoencoder"},
            {"format_version", 1},
            {"features", features},
            {"hidden", hidden},
            {"latent", latent},
            {"gate_order", "ifgo"},
            {"params", params}};
}

LstmAutoencoder LstmAutoencoder::from_json(const nlohmann::json& doc) {
    if (doc.value("model", "") != "lstm_autoencoder") {
        throw DataError("not an LSTM autoencoder model");
    }
    LstmAutoencoder model;
    model.features = doc.at("features").get<std::size_t>();
    model.hidden = doc.at("hidden").get<std::size_t>();
    model.latent = doc.at("latent").get<std::size_t>();
    model.params = doc.at("params").get<std::vector<double>>();
    if (model.params.size() != model.layout().total) {
        throw DataError("LSTM autoencoder: parameter count does not match dimensions");
    }
    return model;
}

LstmAutoencoder init_lstm_autoencoder(std::size_t features, std::size_t hidden, std::size_t latent,
                                      RngStream rng) {
    if (features == 0 || hidden == 0 || latent == 0) {
        throw ConfigError("LSTM autoencoder: dimensions must be positive");
    }
    if (latent >= hidden) throw ConfigError("LSTM autoencoder: latent must be smaller than hidden");
    LstmAutoencoder model{features, hidden, latent, {}};
    const LstmLayout L = model.layout();
    model.params.assign(L.total, 0.0);
    auto fill = [&](std::size_t off, std::size_t n, double limit) {
        for (std::size_t i = 0; i < n; ++i) model.params[off + i] = rng.uniform(-limit, limit);
    };
    const std::size_t H = hidden;
    const double cell = 1.0 / std::sqrt(static_cast<double>(H));
    fill(L.enc_W, 4 * H * features, cell);
    fill(L.enc_U, 4 * H * H, cell);
    fill(L.lat_W, latent * H, std::sqrt(6.0 / static_cast<double>(latent + H)));
    fill(L.dec_W, 4 * H * latent, cell);
    fill(L.dec_U, 4 * H * H, cell);
    fill(L.out_W, features * H, std::sqrt(6.0 / static_cast<double>(features + H)));
    for (std::size_t j = 0; j < H; ++j) {
        model.params[L.enc_b + H + j] = 1.0;
        model.params[L.dec_b + H + j] = 1.0;
    }
    return model;
}

namespace {

/// out[r] += Σ_c M[r, c] v[c]
inline void gemv_add(double* out, const double* M, std::size_t rows, std::size_t cols,
                     const double* v) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double* m = M + r * cols;
        double s = 0.0;
        for (std::size_t c = 0; c < cols; ++c) s += m[c] * v[c];
        out[r] += s;
    }
}

/// out[c] += Σ_r M[r, c] v[r]
inline void gemv_t_add(double* out, const double* M, std::size_t rows, std::size_t cols,
                       const double* v) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double* m = M + r * cols;
        const double vr = v[r];
        for (std::size_t c = 0; c < cols; ++c) out[c] += m[c] * vr;
    }
}

/// G[r, c] += a[r] b[c]
inline void outer_add(double* G, const double* a, std::size_t rows, const double* b,
                      std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double ar = a[r];
        double* g = G + r * cols;
        for (std::size_t c = 0; c < cols; ++c) g[c] += ar * b[c];
    }
}

/// Per-step state of one LSTM pass.
struct CellTrace {
    std::size_t steps = 0;
    std::size_t H = 0;
    std::vector<double> gates; ///< steps x 4H post-activation (i, f, g, o)
    std::vector<double> c;     ///< steps x H
    std::vector<double> tc;    ///< tanh(c)
    std::vector<double> h;     ///< steps x H

    [[nodiscard]] const double* h_at(std::size_t t) const { return h.data() + t * H; }
};

/// Runs the cell over `steps` steps. xw holds W x_t + b for each step;
/// xw_stride 0 feeds the same input every step.
void cell_forward(const double* U, std::size_t H, const double* xw, std::size_t xw_stride,
                  std::size_t steps, CellTrace& tr) {
    tr.steps = steps;
    tr.H = H;
    tr.gates.assign(steps * 4 * H, 0.0);
    tr.c.assign(steps * H, 0.0);
    tr.tc.assign(steps * H, 0.0);
    tr.h.assign(steps * H, 0.0);
    for (std::size_t t = 0; t < steps; ++t) {
        double* a = tr.gates.data() + t * 4 * H;
        std::copy(xw + t * xw_stride, xw + t * xw_stride + 4 * H, a);
        if (t > 0) gemv_add(a, U, 4 * H, H, tr.h_at(t - 1));
        double* c = tr.c.data() + t * H;
        double* tc = tr.tc.data() + t * H;
        double* h = tr.h.data() + t * H;
        const double* c_prev = t > 0 ? tr.c.data() + (t - 1) * H : nullptr;
        for (std::size_t j = 0; j < H; ++j) {
            const double i = logistic(a[j]);
            const double f = logistic(a[H + j]);
            const double g = std::tanh(a[2 * H + j]);
            const double o = logistic(a[3 * H + j]);
            a[j] = i;
            a[H + j] = f;
            a[2 * H + j] = g;
            a[3 * H + j] = o;
            c[j] = i * g + (c_prev ? f * c_prev[j] : 0.0);
            tc[j] = std::tanh(c[j]);
            h[j] = o * tc[j];
        }
    }
}

/// Back-propagates through a traced pass. dh_ext[t] is the loss gradient
/// reaching h_t from outside the recurrence (nullptr rows mean zero). Writes
/// pre-activation gradients per step into da and accumulates gU.
void cell_backward(const double* U, const CellTrace& tr, const std::vector<double>& dh_ext,
                   std::vector<double>& da, double* gU) {
    const std::size_t H = tr.H;
    const std::size_t steps = tr.steps;
    da.assign(steps * 4 * H, 0.0);
    std::vector<double> dh_next(H, 0.0);
    std::vector<double> dc_next(H, 0.0);
    for (std::size_t t = steps; t-- > 0;) {
        const double* gt = tr.gates.data() + t * 4 * H;
        const double* tc = tr.tc.data() + t * H;
        const double* c_prev = t > 0 ? tr.c.data() + (t - 1) * H : nullptr;
        const double* ext = dh_ext.data() + t * H;
        double* d = da.data() + t * 4 * H;
        for (std::size_t j = 0; j < H; ++j) {
            const double i = gt[j];
            const double f = gt[H + j];
            const double g = gt[2 * H + j];
            const double o = gt[3 * H + j];
            const double dh = ext[j] + dh_next[j];
            const double dc = dh * o * (1.0 - tc[j] * tc[j]) + dc_next[j];
            d[j] = dc * g * i * (1.0 - i);
            d[H + j] = c_prev ? dc * c_prev[j] * f * (1.0 - f) : 0.0;
            d[2 * H + j] = dc * i * (1.0 - g * g);
            d[3 * H + j] = dh * tc[j] * o * (1.0 - o);
            dc_next[j] = dc * f;
        }
        std::fill(dh_next.begin(), dh_next.end(), 0.0);
        if (t > 0) {
            outer_add(gU, d, 4 * H, tr.h_at(t - 1), H);
            gemv_t_add(dh_next.data(), U, 4 * H, H, d);
        }
    }
}

/// Squared reconstruction error of one session, times `norm`; gradient added to grad.
double session_loss(const LstmAutoencoder& model, const LstmLayout& L, const SessionTensor& tensor,
                    std::size_t s, double norm, double* grad) {
    const std::size_t steps = tensor.lengths[s];
    const std::size_t F = L.features;
    const std::size_t H = L.hidden;
    const std::size_t Z = L.latent;
    const double* P = model.params.data();
    if (steps == 0) return 0.0;

    std::vector<double> xw(steps * 4 * H);
    for (std::size_t t = 0; t < steps; ++t) {
        double* a = xw.data() + t * 4 * H;
        std::copy(P + L.enc_b, P + L.enc_b + 4 * H, a);
        gemv_add(a, P + L.enc_W, 4 * H, F, tensor.step(s, t).data());
    }
    CellTrace enc;
    cell_forward(P + L.enc_U, H, xw.data(), 4 * H, steps, enc);
    const double* h_last = enc.h_at(steps - 1);

    std::vector<double> z(P + L.lat_b, P + L.lat_b + Z);
    gemv_add(z.data(), P + L.lat_W, Z, H, h_last);

    std::vector<double> zw(P + L.dec_b, P + L.dec_b + 4 * H);
    gemv_add(zw.data(), P + L.dec_W, 4 * H, Z, z.data());
    CellTrace dec;
    cell_forward(P + L.dec_U, H, zw.data(), 0, steps, dec);

    double loss = 0.0;
    std::vector<double> dy;
    if (grad) dy.assign(steps * F, 0.0);
    std::vector<double> y(F);
    for (std::size_t t = 0; t < steps; ++t) {
        std::copy(P + L.out_b, P + L.out_b + F, y.begin());
        gemv_add(y.data(), P + L.out_W, F, H, dec.h_at(t));
        const auto x = tensor.step(s, t);
        for (std::size_t j = 0; j < F; ++j) {
            const double e = y[j] - x[j];
            loss += e * e;
            if (grad) dy[t * F + j] = 2.0 * e * norm;
        }
    }
    if (!grad) return loss * norm;

    std::vector<double> dh_dec(steps * H, 0.0);
    for (std::size_t t = 0; t < steps; ++t) {
        const double* d = dy.data() + t * F;
        outer_add(grad + L.out_W, d, F, dec.h_at(t), H);
        for (std::size_t j = 0; j < F; ++j) grad[L.out_b + j] += d[j];
        gemv_t_add(dh_dec.data() + t * H, P + L.out_W, F, H, d);
    }
    std::vector<double> da;
    cell_backward(P + L.dec_U, dec, dh_dec, da, grad + L.dec_U);
    std::vector<double> da_sum(4 * H, 0.0);
    for (std::size_t t = 0; t < steps; ++t) {
        for (std::size_t k = 0; k < 4 * H; ++k) da_sum[k] += da[t * 4 * H + k];
    }
    outer_add(grad + L.dec_W, da_sum.data(), 4 * H, z.data(), Z);
    for (std::size_t k = 0; k < 4 * H; ++k) grad[L.dec_b + k] += da_sum[k];
    std::vector<double> dz(Z, 0.0);
    gemv_t_add(dz.data(), P + L.dec_W, 4 * H, Z, da_sum.data());

    outer_add(grad + L.lat_W, dz.data(), Z, h_last, H);
    for (std::size_t k = 0; k < Z; ++k) grad[L.lat_b + k] += dz[k];
    std::vector<double> dh_enc(steps * H, 0.0);
    gemv_t_add(dh_enc.data() + (steps - 1) * H, P + L.lat_W, Z, H, dz.data());

    cell_backward(P + L.enc_U, enc, dh_enc, da, grad + L.enc_U);
    for (std::size_t t = 0; t < steps; ++t) {
        const double* d = da.data() + t * 4 * H;
        outer_add(grad + L.enc_W, d, 4 * H, tensor.step(s, t).data(), F);
        for (std::size_t k = 0; k < 4 * H; ++k) grad[L.enc_b + k] += d[k];
    }
    return loss * norm;
}

void check_tensor(const LstmAutoencoder& model, const SessionTensor& tensor) {
    if (tensor.features != model.features) {
        throw DataError("LSTM autoencoder: feature width mismatch");
    }
    if (tensor.data.size() != tensor.sessions * tensor.time_steps * tensor.features ||
        tensor.lengths.size() != tensor.sessions) {
        throw DataError("LSTM autoencoder: malformed session tensor");
    }
    for (std::size_t len : tensor.lengths) {
        if (len > tensor.time_steps) throw DataError("LSTM autoencoder: length exceeds time steps");
    }
}

} // namespace

double lstm_objective(const LstmAutoencoder& model, const SessionTensor& tensor,
                      std::span<const std::size_t> sessions, std::vector<double>* grad,
                      Exec exec) {
    check_tensor(model, tensor);
    const LstmLayout L = model.layout();
    std::size_t entries = 0;
    for (std::size_t s : sessions) entries += tensor.lengths.at(s) * L.features;
    if (entries == 0) throw DataError("LSTM autoencoder: no unpadded steps");
    const double norm = 1.0 / static_cast<double>(entries);

    std::vector<double> losses(sessions.size());
    if (!grad) {
        for_each_index(exec, sessions.size(), [&](std::size_t k) {
            losses[k] = session_loss(model, L, tensor, sessions[k], norm, nullptr);
        });
    } else {
        grad->resize(L.total, 0.0);
        std::vector<std::vector<double>> parts(sessions.size());
        for_each_index(exec, sessions.size(), [&](std::size_t k) {
            parts[k].assign(L.total, 0.0);
            losses[k] = session_loss(model, L, tensor, sessions[k], norm, parts[k].data());
        });
        for (const auto& part : parts) {
            for (std::size_t i = 0; i < L.total; ++i) (*grad)[i] += part[i];
        }
    }
    double loss = 0.0;
    for (double v : losses) loss += v;
    return loss;
}

LstmFit fit_lstm_autoencoder(const SessionTensor& tensor, const LstmConfig& config,
                             const RngStream& rng, Exec exec) {
    if (config.epochs < 0) throw ConfigError("LSTM autoencoder: epochs must be non-negative");
    if (config.batch_size == 0) throw ConfigError("LSTM autoencoder: batch_size must be positive");
    LstmFit fit;
    fit.model = init_lstm_autoencoder(tensor.features, config.hidden, config.latent,
                                      rng.child("init"));
    auto& model = fit.model;
    check_tensor(model, tensor);

    std::vector<std::size_t> usable;
    for (std::size_t s = 0; s < tensor.sessions; ++s) {
        if (tensor.lengths[s] > 0) usable.push_back(s);
    }
    if (usable.empty()) throw DataError("LSTM autoencoder: every session has length zero");

    Adam adam(model.params.size(), {.step_size = config.step_size});
    std::vector<double> grad;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::vector<std::size_t> order = usable;
        RngStream epoch_rng = rng.child("epoch", static_cast<std::uint64_t>(epoch));
        epoch_rng.shuffle(order);
        double weighted = 0.0;
        double entries = 0.0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            const auto batch = std::span<const std::size_t>(order).subspan(start, end - start);
            grad.assign(model.params.size(), 0.0);
            const double loss = lstm_objective(model, tensor, batch, &grad, exec);
            if (!std::isfinite(loss)) throw NumericError("LSTM autoencoder: non-finite loss");
            double n = 0.0;
            for (std::size_t s : batch) n += static_cast<double>(tensor.lengths[s]);
            weighted += loss * n;
            entries += n;
            adam.step(model.params, grad);
        }
        fit.log.train.push_back(weighted / entries);
    }
    return fit;
}

std::vector<double> score_sessions(const LstmAutoencoder& model, const SessionTensor& tensor,
                                   Exec exec) {
    check_tensor(model, tensor);
    const LstmLayout L = model.layout();
    std::vector<double> out(tensor.sessions);
    for_each_index(exec, tensor.sessions, [&](std::size_t s) {
        const std::size_t len = tensor.lengths[s];
        if (len == 0) throw DataError("LSTM autoencoder: cannot score a zero-length session");
        const double norm = 1.0 / static_cast<double>(len * L.features);
        out[s] = session_loss(model, L, tensor, s, norm, nullptr);
    });
    return out;
}

} // namespace threatbench::neural
