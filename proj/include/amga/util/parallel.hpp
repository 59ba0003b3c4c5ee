#pragma once

#include <cstddef>
#include <functional>

namespace amga::util {

/// Worker count from AMGA_THREADS (default: hardware concurrency, at least 1).
std::size_t thread_count();

/// Run fn(i) for i in [0, n) on up to thread_count() threads. Each index is
/// executed exactly once; callers write results into pre-sized slots so the
/// output never depends on scheduling. The first exception is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

} // namespace amga::util
