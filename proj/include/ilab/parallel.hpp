#pragma once

#include <cstddef>
#include <functional>
#include <optional>

namespace ilab {

/// Resolves the worker count: explicit flag, then INTERMITTENCY_LAB_THREADS, then 1.
std::size_t resolve_threads(std::optional<std::size_t> flag);

void set_thread_count(std::size_t n);
std::size_t thread_count();

/// Runs body(lo, hi) over contiguous chunks of [begin, end). Chunks are disjoint, so
/// bodies that write only inside their chunk give results independent of thread count.
void parallel_for(std::size_t begin, std::size_t end,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace ilab
