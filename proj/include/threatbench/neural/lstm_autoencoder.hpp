#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "threatbench/core/exec.hpp"
#include "threatbench/core/rng.hpp"
#include "threatbench/neural/adam.hpp"
#include "threatbench/preprocess/session.hpp"

namespace threatbench::neural {

/// Offsets of each parameter block inside LstmAutoencoder::params. Gate rows
/// are ordered input, forget, candidate, output, H rows each.
struct LstmLayout {
    std::size_t features = 0;
    std::size_t hidden = 0;
    std::size_t latent = 0;

    std::size_t enc_W = 0; ///< 4H x F
    std::size_t enc_U = 0; ///< 4H x H
    std::size_t enc_b = 0; ///< 4H
    std::size_t lat_W = 0; ///< Z x H
    std::size_t lat_b = 0; ///< Z
    std::size_t dec_W = 0; ///< 4H x Z
    std::size_t dec_U = 0; ///< 4H x H
    std::size_t dec_b = 0; ///< 4H
    std::size_t out_W = 0; ///< F x H
    std::size_t out_b = 0; ///< F
    std::size_t total = 0;

    LstmLayout() = default;
    LstmLayout(std::size_t features, std::size_t hidden, std::size_t latent);
};

/// Sequence-to-sequence autoencoder. The encoder reads the unpadded steps of a
/// session, its final hidden state is projected to the latent vector z, and
/// the decoder (h0 = c0 = 0) receives z at every step and emits
/// reconstructions through a linear output projection.
struct LstmAutoencoder {
    std::size_t features = 0;
    std::size_t hidden = 0;
    std::size_t latent = 0;
    std::vector<double> params;

    [[nodiscard]] LstmLayout layout() const { return {features, hidden, latent}; }

    [[nodiscard]] nlohmann::json to_json() const;
    static LstmAutoencoder from_json(const nlohmann::json& doc);
    bool operator==(const LstmAutoencoder&) const = default;
};

/// Uniform ±1/sqrt(H) cell weights with forget-gate bias 1, Glorot projections.
LstmAutoencoder init_lstm_autoencoder(std::size_t features, std::size_t hidden, std::size_t latent,
                                      RngStream rng);

struct LstmConfig {
    std::size_t hidden = 32;
    std::size_t latent = 16;
    int epochs = 12;
    std::size_t batch_size = 32;
    double step_size = 5e-3;
};

struct LstmFit {
    LstmAutoencoder model;
    TrainLog log; ///< train = mean pre-update batch loss of each epoch
};

/// Masked MSE over the unpadded steps of the given sessions (squared errors
/// summed, divided by Σ length x features). Adds the BPTT gradient into grad
/// when non-null; per-session gradients are summed in session order, so the
/// result does not depend on exec.
double lstm_objective(const LstmAutoencoder& model, const preprocess::SessionTensor& tensor,
                      std::span<const std::size_t> sessions, std::vector<double>* grad,
                      Exec exec = Exec::serial);

/// Mini-batch Adam over the sessions with non-zero length. Batch order of
/// epoch e comes from rng.child("epoch", e).
LstmFit fit_lstm_autoencoder(const preprocess::SessionTensor& tensor, const LstmConfig& config,
                             const RngStream& rng, Exec exec = Exec::serial);

/// Masked mean squared reconstruction error of each session.
std::vector<double> score_sessions(const LstmAutoencoder& model,
                                   const preprocess::SessionTensor& tensor,
                                   Exec exec = Exec::parallel);

} // namespace threatbench::neural
