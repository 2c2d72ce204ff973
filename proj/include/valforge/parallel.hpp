#pragma once

#include <cstddef>
#include <functional>

namespace valforge {

/// Number of worker threads used by parallel_for. Honors VALFORGE_THREADS
/// (values < 1 are ignored) and falls back to hardware concurrency.
unsigned worker_count();

/// Runs body(i) for i in [0, count). Each index is visited exactly once;
/// callers write to disjoint slots so results do not depend on scheduling.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace valforge
