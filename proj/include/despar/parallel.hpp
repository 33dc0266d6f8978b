#pragma once

#include <cstddef>
#include <functional>
#include <optional>

namespace despar {

/// Calls fn(i) for i in [0, n) on up to `threads` workers. The first
/// exception thrown by any call is rethrown after all workers stop.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

/// Explicit request, else DESPAR_THREADS, else 1.
int resolve_threads(std::optional<int> requested);

}  // namespace despar
