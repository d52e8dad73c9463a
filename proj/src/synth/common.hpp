#pragma once

#include <vector>

#include "threatbench/synth/synth.hpp"

namespace threatbench::synth::detail {

void validate_tabular(const GeneratorConfig& config, const char* who);

/// Marks exactly round(n * rate) rows as positive, chosen uniformly.
std::vector<char> choose_positive_rows(std::size_t n, double rate, const RngStream& rng);

double clip(double v, double lo, double hi);

} // namespace threatbench::synth::detail
