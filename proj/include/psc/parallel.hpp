#pragma once

#include <cstddef>
#include <functional>

namespace psc {

// Worker cap: PSC_THREADS if set and positive, else hardware concurrency.
std::size_t worker_count();

// Runs fn(i) for i in [0, n) on up to worker_count() threads with a static
// contiguous partition. fn must only write state owned by index i.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace psc
