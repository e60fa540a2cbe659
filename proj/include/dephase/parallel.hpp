#pragma once

#include <functional>

namespace dephase {

// DEPHASE_THREADS in the environment wins over `requested`; a value <= 0
// means one thread per logical core.
int ResolveThreadCount(int requested);

// Runs body(i) for i in [0, count) on up to `threads` workers. Results must be
// written to per-index slots by the caller. The first exception thrown by any
// body is rethrown after all workers stop.
void ParallelFor(int count, int threads, const std::function<void(int)>& body);

}  // namespace dephase
