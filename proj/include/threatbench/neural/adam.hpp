#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace threatbench::neural {

struct AdamConfig {
    double step_size = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Adam with bias-corrected moment estimates and a fixed step size.
class Adam {
public:
    Adam(std::size_t n_params, const AdamConfig& config);

    void step(std::span<double> params, std::span<const double> grad);
    [[nodiscard]] long steps() const { return t_; }

private:
    AdamConfig config_;
    std::vector<double> m_;
    std::vector<double> v_;
    long t_ = 0;
};

/// Per-epoch losses; valid is empty when no validation data was given.
struct TrainLog {
    std::vector<double> train;
    std::vector<double> valid;

    bool operator==(const TrainLog&) const = default;
};

} // namespace threatbench::neural
