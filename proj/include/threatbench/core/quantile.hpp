#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>

namespace threatbench {

/// 1-based rank k = ceil(percent/100 * n), clamped to [1, n].
/// The product is formed before dividing so integral ranks come out exact.
inline std::size_t nearest_rank(double percent, std::size_t n) {
    const double raw = percent * static_cast<double>(n) / 100.0;
    const double k = std::ceil(raw - 1e-9);
    return std::clamp<std::size_t>(k < 1.0 ? 1 : static_cast<std::size_t>(k), 1, n);
}

} // namespace threatbench
