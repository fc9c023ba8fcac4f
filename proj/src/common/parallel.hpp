#pragma once

#include <cstddef>
#include <functional>

namespace pcsod {

// Worker count: PCSOD_THREADS if set and positive, else hardware concurrency.
std::size_t worker_count();

// Calls fn(i) for i in [0, n). Iterations must be independent; results do not
// depend on how they are distributed across workers.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace pcsod
