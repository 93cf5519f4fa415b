#pragma once

#include <functional>

namespace spectral {

/// Number of worker threads the library may use. Reads SPECTRAL_THREADS
/// (values < 1 are treated as 1); falls back to hardware concurrency.
int thread_budget();

/// Runs fn(i) for i in [begin, end). Iterations are distributed over at most
/// thread_budget() threads; nested calls run serially so the budget is a
/// global cap, not a per-level one. fn must be safe to call concurrently for
/// distinct i. Exceptions from workers are rethrown on the calling thread.
void parallel_for(int begin, int end, const std::function<void(int)>& fn);

}  // namespace spectral
