#pragma once

#include <cstddef>
#include <functional>

namespace lipgp {

/// Worker count used by parallel loops (defaults to the hardware concurrency).
int num_threads();
void set_num_threads(int n);

/// Calls fn(begin, end, worker) on contiguous chunks of [0, count). Chunks are
/// assigned statically, so results written by index do not depend on timing.
/// Loops started from inside a worker run serially.
void parallel_for(std::size_t count, const std::function<void(std::size_t, std::size_t, int)>& fn,
                  int max_workers = 0);

}  // namespace lipgp
