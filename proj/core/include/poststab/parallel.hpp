#pragma once

#include <cstddef>
#include <functional>

namespace poststab {

// Worker count: POSTSTAB_THREADS if set and positive, else the hardware
// concurrency (at least 1).
std::size_t thread_budget();

// Runs fn(i) for i in [0, n) on up to thread_budget() threads. The exception
// from the lowest failing index is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace poststab
