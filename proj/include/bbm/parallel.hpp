#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace bbm {

// Process-wide cap on worker threads. 0 means hardware concurrency.
void set_worker_count(unsigned workers);
unsigned worker_count();

// Runs body(i) for i in [0, n). Chunks are contiguous; callers write into
// per-index slots so any later reduction order is fixed.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

// Evaluates f(i) for every i and sums the results in index order.
double ordered_sum(std::size_t n, const std::function<double(std::size_t)>& f);

}  // namespace bbm
