#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace threatbench {

/// Counter-based random stream. Draw i of a stream is mix(key + i * gamma),
/// where the key is derived from (seed, label). Child streams hash their label
/// into the parent key, so they do not depend on how many values the parent
/// has already produced.
///
/// All distributions are implemented here rather than through <random> so the
/// value sequences (and therefore golden files) are identical across standard
/// libraries.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::string_view label);

    [[nodiscard]] RngStream child(std::string_view label) const;
    [[nodiscard]] RngStream child(std::string_view label, std::uint64_t index) const;

    std::uint64_t next_u64();
    /// Uniform on [0, 1) with 53 bits of resolution.
    double uniform();
    double uniform(double lo, double hi);
    /// Uniform integer on [0, n). n must be positive.
    std::uint64_t uniform_int(std::uint64_t n);
    /// Uniform integer on [lo, hi] inclusive.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
    double normal(double mean = 0.0, double sd = 1.0);
    double lognormal(double log_mean, double log_sd);
    bool bernoulli(double p);
    std::uint64_t poisson(double mean);
    /// Index drawn proportionally to non-negative weights.
    std::size_t categorical(const std::vector<double>& weights);

    template <class T>
    void shuffle(std::vector<T>& values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(uniform_int(i));
            std::swap(values[i - 1], values[j]);
        }
    }

    /// First k entries of a uniformly random permutation of [0, n).
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

    [[nodiscard]] std::uint64_t seed() const { return seed_; }
    [[nodiscard]] std::uint64_t key() const { return key_; }
    [[nodiscard]] const std::string& label() const { return label_; }

private:
    RngStream(std::uint64_t seed, std::string label, std::uint64_t key);

    std::uint64_t seed_;
    std::string label_;
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

} // namespace threatbench
