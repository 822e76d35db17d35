#pragma once

#include <functional>

namespace phasetrap {

// Process-wide default worker count (initially hardware_concurrency).
int default_thread_count();
void set_default_thread_count(int threads);

// Runs fn(i) for i in [0, count). Work items must write to disjoint slots;
// reductions are the caller's job and should run in index order so results
// match a serial run. threads == 0 uses the process default.
void parallel_for(int count, const std::function<void(int)>& fn,
                  int threads = 0);

}  // namespace phasetrap
