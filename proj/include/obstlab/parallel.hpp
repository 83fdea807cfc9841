#pragma once

#include <cstddef>
#include <functional>

namespace obstlab {

/// Worker count from OBSTLAB_THREADS (default 1, clamped to [1, 64]).
int thread_count();

/// Runs body(i) for i in [0, n) on thread_count() threads with static chunking.
/// Each index is written by exactly one call, so results do not depend on the
/// thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace obstlab
