#pragma once

#include <cstddef>
#include <functional>

namespace geowise {

// Worker count: GEOWISE_THREADS when set to a positive integer, otherwise the
// hardware concurrency (at least 1).
std::size_t thread_count();

// Runs body(begin, end) over contiguous chunks of [0, n). Chunk boundaries
// depend only on n and thread_count(), and results must be written to
// per-index slots, so outcomes do not depend on scheduling. The first
// exception thrown by any chunk is rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t begin, std::size_t end)>& body);

}  // namespace geowise
