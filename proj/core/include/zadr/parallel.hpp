#pragma once

#include <cstddef>
#include <functional>

namespace zadr {

/// Worker count: ZADR_THREADS if set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
std::size_t worker_count();

/// Runs body(i) for i in [0, count) on up to `workers` threads. Work units
/// must write only to their own slot. The first exception is rethrown after
/// all workers join.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body, std::size_t workers = 0);

}  // namespace zadr
