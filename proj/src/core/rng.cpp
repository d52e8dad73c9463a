#include "threatbench/core/rng.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "threatbench/core/error.hpp"

namespace threatbench {
namespace {

constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t derive_key(std::uint64_t parent, std::string_view label) {
    return mix64(mix64(parent ^ fnv1a(label)) + kGamma);
}

} // namespace

RngStream::RngStream(std::uint64_t seed, std::string_view label)
    : seed_(seed), label_(label), key_(derive_key(mix64(seed + kGamma), label)) {}

RngStream::RngStream(std::uint64_t seed, std::string label, std::uint64_t key)
    : seed_(seed), label_(std::move(label)), key_(key) {}

RngStream RngStream::child(std::string_view label) const {
    return RngStream(seed_, label_ + "/" + std::string(label), derive_key(key_, label));
}

RngStream RngStream::child(std::string_view label, std::uint64_t index) const {
    return child(std::string(label) + "#" + std::to_string(index));
}

std::uint64_t RngStream::next_u64() {
    ++counter_;
    return mix64(key_ + counter_ * kGamma);
}

double RngStream::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

std::uint64_t RngStream::uniform_int(std::uint64_t n) {
    if (n == 0) {
        throw ConfigError("uniform_int: empty range");
    }
    // Rejection keeps the draw unbiased.
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x = next_u64();
    while (x >= limit) {
        x = next_u64();
    }
    return x % n;
}

std::int64_t RngStream::uniform_int(std::int64_t lo, std::int64_t hi) {
    if (hi < lo) {
        throw ConfigError("uniform_int: hi < lo");
    }
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(uniform_int(span));
}

double RngStream::normal(double mean, double sd) {
    // Box-Muller; one value per call so the stream position is easy to reason about.
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    return mean + sd * z;
}

double RngStream::lognormal(double log_mean, double log_sd) {
    return std::exp(normal(log_mean, log_sd));
}

bool RngStream::bernoulli(double p) {
    return uniform() < p;
}

std::uint64_t RngStream::poisson(double mean) {
    if (mean < 0.0 || !std::isfinite(mean)) {
        throw ConfigError("poisson: mean must be finite and non-negative");
    }
    if (mean == 0.0) {
        return 0;
    }
    if (mean > 500.0) {
        const double v = std::round(normal(mean, std::sqrt(mean)));
        return v < 0.0 ? 0 : static_cast<std::uint64_t>(v);
    }
    // Knuth's product method, exact for moderate means.
    const double limit = std::exp(-mean);
    std::uint64_t k = 0;
    double product = uniform();
    while (product > limit) {
        ++k;
        product *= uniform();
    }
    return k;
}

std::size_t RngStream::categorical(const std::vector<double>& weights) {
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (weights.empty() || !(total > 0.0)) {
        throw ConfigError("categorical: weights must have a positive sum");
    }
    const double target = uniform() * total;
    double running = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        running += weights[i];
        if (target < running) {
            return i;
        }
    }
    // Floating round-off can leave target == total; return the last positive weight.
    for (std::size_t i = weights.size(); i > 0; --i) {
        if (weights[i - 1] > 0.0) {
            return i - 1;
        }
    }
    return weights.size() - 1;
}

std::vector<std::size_t> RngStream::sample_without_replacement(std::size_t n, std::size_t k) {
    if (k > n) {
        throw ConfigError("sample_without_replacement: k exceeds n");
    }
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) {
        const auto j = i + static_cast<std::size_t>(uniform_int(n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    return idx;
}

} // namespace threatbench
