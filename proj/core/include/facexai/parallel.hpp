#pragma once

#include <cstddef>
#include <functional>

namespace facexai {

// Hardware concurrency, at least 1.
int default_jobs();

// Calls fn(i) for every i in [0, n) on up to `jobs` threads. Callers write
// into preallocated slots, so results never depend on scheduling. If any
// call throws, the exception from the lowest index is rethrown after all
// workers stop.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

}  // namespace facexai
