#pragma once

#include <cstddef>
#include <functional>

namespace bubblelab {

// Process-wide cap on worker threads used by parallel_for. 1 disables
// threading entirely; 0 means use hardware_concurrency.
void set_max_threads(unsigned n);
unsigned max_threads();

// Runs fn(i) for every i in [0, n), statically partitioned across threads.
// Each index must touch only its own output slot, so results are identical
// for any thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace bubblelab
