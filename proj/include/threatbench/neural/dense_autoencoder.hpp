#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "threatbench/core/exec.hpp"
#include "threatbench/core/matrix.hpp"
#include "threatbench/core/rng.hpp"
#include "threatbench/neural/adam.hpp"

namespace threatbench::neural {

/// Fully connected autoencoder with tanh hidden layers and a linear output.
/// params holds, per layer l, W_l (out x in, row-major) followed by b_l.
struct DenseAutoencoder {
    std::vector<std::size_t> layer_sizes; ///< d, h1, ..., z, ..., h1, d
    std::vector<double> params;
    double l1 = 0.0;

    [[nodiscard]] std::size_t input_dim() const { return layer_sizes.front(); }
    [[nodiscard]] std::size_t n_layers() const { return layer_sizes.size() - 1; }
    /// Offset of W_l in params; b_l follows at offset + out * in.
    [[nodiscard]] std::size_t weight_offset(std::size_t layer) const;
    [[nodiscard]] std::vector<double> reconstruct(std::span<const double> x) const;
    /// Σ|w| over weight matrices (biases excluded).
    [[nodiscard]] double weight_l1() const;

    [[nodiscard]] nlohmann::json to_json() const;
    static DenseAutoencoder from_json(const nlohmann::json& doc);
    bool operator==(const DenseAutoencoder&) const = default;
};

/// d -> max(8, d/2) -> max(4, d/4) -> max(8, d/2) -> d
std::vector<std::size_t> default_dense_layers(std::size_t d);

/// Throws ConfigError unless sizes read the same backwards, have at least
/// three entries and contain no zero.
void check_symmetric(std::span<const std::size_t> sizes);

/// Randomly initialized network (uniform Glorot weights, zero biases).
DenseAutoencoder init_dense_autoencoder(std::vector<std::size_t> layer_sizes, double l1,
                                        RngStream rng);

struct DenseConfig {
    std::vector<std::size_t> layer_sizes; ///< empty selects default_dense_layers
    double l1 = 1e-5;
    int epochs = 30;
    std::size_t batch_size = 64;
    double step_size = 1e-3;
};

struct DenseFit {
    DenseAutoencoder model;
    TrainLog log;
};

/// Objective over the given rows: mean over rows and features of the squared
/// reconstruction error plus l1 Σ|w|. Adds the gradient into grad when non-null.
double dense_objective(const DenseAutoencoder& model, const Matrix& X,
                       std::span<const std::size_t> rows, std::vector<double>* grad);

/// Mini-batch Adam. Batch order of epoch e comes from rng.child("epoch", e).
/// Pass an empty X_valid to skip validation logging.
DenseFit fit_dense_autoencoder(const Matrix& X, const DenseConfig& config, const RngStream& rng,
                               const Matrix& X_valid = {});

/// Per-row mean squared reconstruction error.
std::vector<double> reconstruction_errors(const DenseAutoencoder& model, const Matrix& X,
                                          Exec exec = Exec::parallel);

} // namespace threatbench::neural
