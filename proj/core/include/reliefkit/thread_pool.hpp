#pragma once

#include <cstddef>
#include <functional>

namespace relief {

/// Runs fn(i) for every i in [0, count) across `threads` workers (0 selects
/// the hardware concurrency). Items must only write to their own output
/// slots; results are therefore assembled in index order regardless of
/// completion order. The first exception thrown by any item is rethrown on
/// the calling thread after all workers finish.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn,
                  unsigned threads = 0);

} // namespace relief
