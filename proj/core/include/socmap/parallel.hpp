#pragma once

#include <cstddef>
#include <functional>

namespace socmap {

/// Process-wide worker cap. Initialized from SOCMAP_THREADS, else hardware
/// concurrency.
int default_threads();
void set_default_threads(int threads);

/// Runs fn(i) for i in [0, n). Calls made from inside a worker run serially,
/// so nested loops never oversubscribe. Results must be written to disjoint
/// slots; the first exception by index is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, int threads = 0);

}  // namespace socmap
