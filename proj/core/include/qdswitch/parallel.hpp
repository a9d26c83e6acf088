#pragma once

#include <cstddef>
#include <functional>

namespace qdswitch {

/// Worker count: QDSWITCH_WORKERS if set to a positive integer, otherwise
/// std::thread::hardware_concurrency() (at least 1).
int worker_count();

/// Runs body(i) for i in [0, n) on up to worker_count() threads. Each index
/// runs exactly once; callers write into pre-sized slots so the assembled
/// result does not depend on scheduling. The exception from the lowest
/// failing index is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace qdswitch
