#pragma once

#include <cstddef>
#include <functional>

namespace bethe {

// Resolve the worker count: explicit request > BETHE_LAB_WORKERS env var >
// hardware concurrency.  requested <= 0 means "not specified".
int resolve_workers(int requested);

// Runs fn(i) for i in [0, n) on `workers` threads.  Callers must write
// results into per-index slots; reductions are then performed sequentially
// by index, so outputs do not depend on the scheduling.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace bethe
