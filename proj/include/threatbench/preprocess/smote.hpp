#pragma once

#include <cstddef>
#include <vector>

#include "threatbench/core/exec.hpp"
#include "threatbench/core/matrix.hpp"
#include "threatbench/core/rng.hpp"

namespace threatbench::preprocess {

/// k nearest neighbours of every row among the other rows, by Euclidean
/// distance; ties go to the lower row index. Row i of the result lists its
/// neighbours nearest first.
std::vector<std::vector<std::size_t>> nearest_neighbors(const Matrix& rows, std::size_t k,
                                                        Exec exec = Exec::parallel);

struct SmoteResult {
    Matrix samples;
    std::vector<std::size_t> parent;   ///< minority row each sample starts from
    std::vector<std::size_t> neighbor; ///< neighbour it moves toward
    std::vector<double> step;          ///< interpolation factor in [0, 1)
};

/// Each synthetic row is x + u * (x_nn - x): x a uniformly chosen minority row,
/// x_nn one of its k nearest minority neighbours chosen uniformly, u ~ U[0, 1).
/// Requires more than k minority rows; n_synthetic == 0 yields an empty result.
SmoteResult smote_oversample(const Matrix& minority, std::size_t k, std::size_t n_synthetic,
                             const RngStream& rng, Exec exec = Exec::parallel);

} // namespace threatbench::preprocess
