#pragma once

#include <cstddef>
#include <functional>

namespace autores {

// Parallel-map capability handed to batch drivers. Implementations must call
// body(i) exactly once for every i in [0, n); ordering is unspecified, so
// bodies write into pre-sized per-index slots only.
using ParallelFor = std::function<void(std::size_t n, const std::function<void(std::size_t)>& body)>;

ParallelFor sequential_for();

// Pool of `threads` workers pulling indices from a shared counter
// (0 = hardware concurrency).
ParallelFor threaded_for(unsigned threads);

}  // namespace autores
