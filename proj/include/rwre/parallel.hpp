#pragma once

#include <cstdint>
#include <functional>

namespace rwre {

/// Worker count from RWRE_THREADS, else the hardware concurrency (>= 1).
int default_threads();

/// Calls fn(i) for i in [0, n) on up to `threads` workers (0 = default).
/// Items are claimed dynamically; fn must write results by index. The first
/// exception thrown by any item is rethrown after all workers stop.
void parallel_for(int64_t n, int threads, const std::function<void(int64_t)>& fn);

}  // namespace rwre
