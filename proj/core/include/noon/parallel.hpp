#pragma once

#include <cstddef>
#include <functional>

namespace noon {

/// Worker count from NOON_THREADS, else hardware concurrency (at least 1).
std::size_t default_thread_count();

/// Runs fn(i) for i in [0, n) on up to `threads` workers. Work items must be
/// independent; the first exception thrown by any item is rethrown.
void parallel_for(std::size_t n, std::size_t threads,
                  const std::function<void(std::size_t)>& fn);

} // namespace noon
