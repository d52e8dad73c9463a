#include "threatbench/preprocess/smote.hpp"

#include <algorithm>
#include <numeric>

#include "threatbench/core/error.hpp"

namespace threatbench::preprocess {

std::vector<std::vector<std::size_t>> nearest_neighbors(const Matrix& rows, std::size_t k,
                                                        Exec exec) {
    const auto n = rows.rows();
    if (k >= n) {
        throw DataError("nearest_neighbors: need more than k rows");
    }
    std::vector<std::vector<std::size_t>> out(n);
    for_each_index(exec, n, [&](std::size_t i) {
        std::vector<std::pair<double, std::size_t>> dist;
        dist.reserve(n - 1);
        const auto xi = rows.row(i);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const auto xj = rows.row(j);
            double d = 0.0;
            for (std::size_t c = 0; c < xi.size(); ++c) {
                const double diff = xi[c] - xj[c];
                d += diff * diff;
            }
            dist.emplace_back(d, j);
        }
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
        out[i].reserve(k);
        for (std::size_t m = 0; m < k; ++m) out[i].push_back(dist[m].second);
    });
    return out;
}

SmoteResult smote_oversample(const Matrix& minority, std::size_t k, std::size_t n_synthetic,
                             const RngStream& rng, Exec exec) {
    if (k == 0) {
        throw ConfigError("smote_oversample: k must be positive");
    }
    if (minority.rows() <= k) {
        throw DataError("smote_oversample: " + std::to_string(minority.rows()) +
                        " minority rows cannot supply " + std::to_string(k) + " neighbours");
    }
    SmoteResult result;
    result.samples = Matrix(n_synthetic, minority.cols());
    if (n_synthetic == 0) {
        return result;
    }
    const auto neighbors = nearest_neighbors(minority, k, exec);
    auto stream = rng.child("smote");
    result.parent.resize(n_synthetic);
    result.neighbor.resize(n_synthetic);
    result.step.resize(n_synthetic);
    for (std::size_t s = 0; s < n_synthetic; ++s) {
        const auto parent = static_cast<std::size_t>(stream.uniform_int(minority.rows()));
        const auto nn = neighbors[parent][stream.uniform_int(k)];
        const double u = stream.uniform();
        const auto x = minority.row(parent);
        const auto y = minority.row(nn);
        auto out = result.samples.row(s);
        for (std::size_t c = 0; c < x.size(); ++c) {
            out[c] = x[c] + u * (y[c] - x[c]);
        }
        result.parent[s] = parent;
        result.neighbor[s] = nn;
        result.step[s] = u;
    }
    return result;
}

} // namespace threatbench::preprocess
