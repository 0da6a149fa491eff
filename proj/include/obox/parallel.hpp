#pragma once

#include <cstddef>
#include <functional>

namespace obox {

/// Worker count: OBOX_THREADS if set and positive, otherwise hardware concurrency.
unsigned thread_count();

/// Calls fn(i) for i in [0, n), split into contiguous chunks across threads.
/// fn must only write state owned by index i. The first exception thrown by a
/// worker is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace obox
