#include "ilab/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

#include "ilab/error.hpp"

namespace ilab {

namespace {
std::atomic<std::size_t> g_threads{1};
}

std::size_t resolve_threads(std::optional<std::size_t> flag) {
  if (flag) {
    if (*flag == 0) throw ValidationError("--threads must be at least 1");
    return *flag;
  }
  if (const char* env = std::getenv("INTERMITTENCY_LAB_THREADS")) {
    try {
      long v = std::stol(env);
      if (v >= 1) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
    throw ValidationError(std::string("bad INTERMITTENCY_LAB_THREADS value '") + env + "'");
  }
  return 1;
}

void set_thread_count(std::size_t n) { g_threads = std::max<std::size_t>(1, n); }
std::size_t thread_count() { return g_threads; }

void parallel_for(std::size_t begin, std::size_t end,
                  const std::function<void(std::size_t, std::size_t)>& body) {
  if (end <= begin) return;
  std::size_t n = end - begin;
  std::size_t t = std::min(thread_count(), n);
  if (t <= 1 || n < 256) {
    body(begin, end);
    return;
  }
  std::vector<std::thread> pool;
  std::size_t chunk = (n + t - 1) / t;
  for (std::size_t w = 0; w < t; ++w) {
    std::size_t lo = begin + w * chunk;
    std::size_t hi = std::min(end, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&body, lo, hi] { body(lo, hi); });
  }
  for (auto& th : pool) th.join();
}

}  // namespace ilab
