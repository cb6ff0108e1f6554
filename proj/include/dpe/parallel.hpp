#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

#include <omp.h>

namespace dpe {

/// Each data-parallel kernel takes one of these. Serial is the reference
/// path kept for testing; both must produce bit-identical results.
enum class Exec { Serial, Parallel };

/// Runs body(i) for i in [0, n). Iterations must write disjoint outputs.
/// The first exception thrown by any iteration is rethrown on the caller.
template <class Body>
void parallel_for(Exec exec, std::size_t n, Body&& body) {
    if (exec == Exec::Serial || n < 2) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::exception_ptr error;
    std::mutex error_mutex;
    const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < count; ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);
}

inline void set_thread_count(int n) {
    if (n > 0) omp_set_num_threads(n);
}

}  // namespace dpe
