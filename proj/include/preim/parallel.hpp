// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>

namespace preim {

/// Worker count: hardware concurrency, capped by the PREIM_THREADS environment variable.
std::size_t worker_count();

/// Runs body(i) for i in [0, count). Each index is processed exactly once; callers
/// write results into per-index slots so the outcome does not depend on scheduling.
/// The first exception thrown by any worker is rethrown on the calling thread.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace preim
