#include "threatbench/neural/adam.hpp"

#include <cmath>

#include "threatbench/core/error.hpp"

namespace threatbench::neural {

Adam::Adam(std::size_t n_params, const AdamConfig& config)
    : config_(config), m_(n_params, 0.0), v_(n_params, 0.0) {
    if (!(config.step_size > 0.0)) throw ConfigError("adam: step_size must be positive");
}

void Adam::step(std::span<double> params, std::span<const double> grad) {
    if (params.size() != m_.size() || grad.size() != m_.size()) {
        throw DataError("adam: parameter count mismatch");
    }
    ++t_;
    const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        m_[i] = config_.beta1 * m_[i] + (1.0 - config_.beta1) * grad[i];
        v_[i] = config_.beta2 * v_[i] + (1.0 - config_.beta2) * grad[i] * grad[i];
        const double m_hat = m_[i] / c1;
        const double v_hat = v_[i] / c2;
        params[i] -= config_.step_size * m_hat / (std::sqrt(v_hat) + config_.epsilon);
    }
}

} // namespace threatbench::neural
