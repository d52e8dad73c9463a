#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>

namespace threatbench {

/// Selects between the OpenMP kernel and its serial reference loop.
/// Both must produce bit-identical results; tests compare them.
enum class Exec { serial, parallel };

template <class Body>
void for_each_index(Exec exec, std::size_t n, Body&& body) {
    if (exec == Exec::parallel) {
        // Exceptions cannot leave an OpenMP region; the one from the lowest
        // index is rethrown so the error matches the serial loop.
        const auto count = static_cast<std::int64_t>(n);
        std::exception_ptr error;
        std::int64_t error_index = count;
#pragma omp parallel for schedule(dynamic, 1)
        for (std::int64_t i = 0; i < count; ++i) {
            try {
                body(static_cast<std::size_t>(i));
            } catch (...) {
#pragma omp critical(threatbench_for_each_error)
                if (i < error_index) {
                    error_index = i;
                    error = std::current_exception();
                }
            }
        }
        if (error) std::rethrow_exception(error);
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            body(i);
        }
    }
}

} // namespace threatbench
