#pragma once

#include <tbb/blocked_range.h>
#include <tbb/parallel_for.h>
#include <tbb/task_arena.h>

#include <cstddef>

namespace firemarg {

/// Calls fn(i) for i in [0, n) on `workers` threads (0: TBB default). Callers
/// write results into per-index slots, so output never depends on scheduling.
template <class Fn>
void parallel_indices(std::size_t n, unsigned workers, Fn&& fn) {
  if (n == 0) return;
  auto body = [&] {
    tbb::parallel_for(tbb::blocked_range<std::size_t>(0, n), [&](const auto& r) {
      for (std::size_t i = r.begin(); i != r.end(); ++i) fn(i);
    });
  };
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
  } else if (workers == 0) {
    body();
  } else {
    tbb::task_arena arena(static_cast<int>(workers));
    arena.execute(body);
  }
}

}  // namespace firemarg
