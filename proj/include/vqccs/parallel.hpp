#pragma once

#include <cstddef>
#include <functional>

namespace vqccs {

// Runs fn(i) for i in [0, count) across `workers` threads with static
// contiguous chunks. Callers must write results into disjoint per-index
// slots; combined with an index-ordered reduction this keeps results
// identical for any worker count.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn);

// VQCCS_WORKERS environment override, otherwise hardware concurrency.
int default_workers();

}  // namespace vqccs
