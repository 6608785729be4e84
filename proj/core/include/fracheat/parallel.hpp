#pragma once

#include <cstddef>
#include <functional>

namespace fracheat {

// Worker count for per-mode loops. 1 keeps every reduction in serial order.
void set_thread_count(int n);
int thread_count();

// Runs body(begin, end) over contiguous chunks of [0, n). Chunks never overlap,
// so bodies that write disjoint outputs produce identical results for any count.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace fracheat
