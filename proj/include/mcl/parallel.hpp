#pragma once

#include <cstddef>
#include <functional>

namespace mcl {

/// Splits [0, n) into `workers` contiguous chunks and runs fn(begin, end,
/// worker) for each, on the calling thread when workers <= 1. Exceptions from
/// workers are rethrown on the caller (first by worker index).
void parallel_for(std::size_t n, int workers,
                  const std::function<void(std::size_t, std::size_t, int)>& fn);

/// Runs task(k) for k in [0, count) on `workers` threads pulling tasks in
/// index order. Results must be written to per-task slots.
void parallel_tasks(std::size_t count, int workers, const std::function<void(std::size_t)>& task);

/// MCL_WORKERS if set and positive, otherwise `fallback`.
int default_worker_count(int fallback = 1);

}  // namespace mcl
