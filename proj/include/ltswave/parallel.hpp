#pragma once

#include <functional>

namespace ltswave {

/// Worker bound from LTS_WAVE_THREADS (default 1, invalid values ignored).
int worker_count();

/// Calls fn(i) for i in [0, n) on up to worker_count() threads. Results must
/// be written to per-index slots so the output order never depends on
/// scheduling. The first exception thrown by fn is rethrown.
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace ltswave
