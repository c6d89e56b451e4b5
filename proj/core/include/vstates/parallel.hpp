// vstates -- deterministic data-parallel helper.
//
// The O(N^2) boundary sums parallelize over *target* nodes only: each target's
// accumulation runs sequentially in a fixed order, so results are bit-identical
// for every worker count (including 1).

#pragma once

#include <cstddef>
#include <functional>

namespace vstates::parallel {

/// Set the worker-thread budget for subsequent parallel loops (min 1).
/// Defaults to 1 (fully serial) so that library results are reproducible
/// unless a caller explicitly opts in to threads.
void set_max_threads(unsigned n);

/// Current worker-thread budget.
unsigned max_threads();

/// Invoke fn(i) for i in [0, n). Work items must be independent; they may run
/// on different threads but each item runs exactly once. Exceptions thrown by
/// work items are captured and rethrown on the calling thread.
void for_each_index(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace vstates::parallel
