#pragma once

#include <cstddef>
#include <functional>

namespace flowmap {

/// Worker cap for data-parallel loops. Defaults to FLOWMAP_THREADS, else the
/// hardware concurrency.
int worker_count();
void set_worker_count(int n);

/// Runs body(begin, end) over contiguous chunks of [0, n). Chunks never
/// overlap, so bodies that write disjoint outputs stay deterministic.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t min_chunk = 1);

}  // namespace flowmap
