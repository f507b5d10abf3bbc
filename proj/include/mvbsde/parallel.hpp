#pragma once

#include <cstddef>
#include <functional>

namespace mvbsde {

// Number of worker threads to use; 0 means the hardware concurrency.
std::size_t resolve_threads(std::size_t requested);

// Runs body(begin, end) over contiguous chunks of [0, n). Chunks write disjoint outputs,
// so results never depend on the thread count.
void parallel_for(std::size_t n, std::size_t threads,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace mvbsde
