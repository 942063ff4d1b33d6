#pragma once

#include <cstddef>
#include <functional>

namespace paraprec {

unsigned default_workers();

// Runs body(i) for i in [0, count) on up to `workers` threads. Each index is
// processed exactly once and results must be written to per-index slots, so
// the outcome never depends on the worker count. The exception of the lowest
// failing index is rethrown.
void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& body);

}  // namespace paraprec
