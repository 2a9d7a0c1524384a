#pragma once

#include <cstddef>
#include <functional>

namespace volcp {

// Worker count for parallel loops. Reads the VOLCP_WORKERS environment
// variable once; 0 or unset means hardware concurrency.
std::size_t worker_count();

// Runs fn(i) for i in [0, count). Work is split into contiguous chunks, one
// per worker. Each iteration must write only to its own slot of any shared
// output, so results are identical for any worker count. The first exception
// thrown by any iteration is rethrown on the calling thread.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn,
                  std::size_t workers = 0);

}  // namespace volcp
