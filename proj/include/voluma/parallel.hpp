#pragma once

#include <cstddef>
#include <functional>

namespace voluma {

/// Worker cap: VOLUMA_THREADS when set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
std::size_t worker_count();

/// Runs body(i) for i in [0, n) on up to `workers` threads. Callers write
/// results into slot i so output order never depends on scheduling. The first
/// exception thrown (lowest index) is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body, std::size_t workers = 0);

}  // namespace voluma
