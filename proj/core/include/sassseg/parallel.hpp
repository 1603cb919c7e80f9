#pragma once

#include <cstddef>
#include <functional>

namespace sass {

/// Worker count: SASS_SEG_THREADS if set (>= 1), else hardware concurrency.
std::size_t default_thread_count();

/// Runs body(i) for i in [0, n) on up to `threads` workers. Callers write
/// results into per-index slots, so output never depends on scheduling.
/// Nested calls from inside a worker run serially.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                  std::size_t threads = default_thread_count());

}  // namespace sass
