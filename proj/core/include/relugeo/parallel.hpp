#pragma once

#include <cstddef>
#include <functional>

namespace relugeo {

/// Worker cap: RELUGEO_THREADS when set, otherwise hardware concurrency.
std::size_t thread_budget();

/// Run fn(i) for i in [0, count) across worker threads. Callers own any
/// result slots indexed by i, so the reduction order stays deterministic.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace relugeo
