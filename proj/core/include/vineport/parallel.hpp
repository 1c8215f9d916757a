#pragma once

#include <cstddef>
#include <functional>

namespace vineport {

/// Worker count: VINEPORT_THREADS if set, otherwise hardware concurrency.
std::size_t thread_count();

/// Runs body(i) for i in [0, n). Tasks must be independent; results are
/// written by index so output is identical for any thread count. The first
/// exception thrown by a task is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

} // namespace vineport
