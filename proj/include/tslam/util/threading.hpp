#pragma once

#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace ts {

/// Number of worker threads to use; 0 requests hardware concurrency.
std::size_t resolve_thread_count(std::size_t requested);

/// Runs fn(begin, end, slice_index) over n items split into contiguous
/// slices, one per thread. Slice boundaries depend only on (n, threads),
/// so any per-slice accumulation merged in slice order is deterministic.
void parallel_slices(std::size_t n, std::size_t threads,
                     const std::function<void(std::size_t, std::size_t,
                                              std::size_t)>& fn);

}  // namespace ts
