#pragma once

#include <cstddef>
#include <functional>

namespace otq {

/// Worker count used by parallel loops. Reads SDOT_THREADS on first use
/// (0 or unset = hardware concurrency) unless overridden.
int thread_count();
void set_thread_count(int n);

/// Calls fn(i) for i in [0, n). Work is split into contiguous chunks, so any
/// per-index output written by fn lands in index order regardless of threads.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace otq
