#pragma once

#include <cstddef>
#include <functional>

namespace yudovich {

/// Worker count from YUDOVICH_WORKERS (default: hardware concurrency, at least 1).
unsigned worker_count();

/// Runs body(i) for i in [0, n) on worker_count() threads in contiguous chunks. Each index is
/// handled by exactly one thread, so writes to per-index slots are deterministic.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace yudovich
