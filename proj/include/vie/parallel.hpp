#pragma once

#include <atomic>
#include <functional>
#include <thread>
#include <vector>

namespace vie {

/// Runs f(i) for i in [0, count) across hardware threads. Chunked by index;
/// callers must write to disjoint locations.
inline void parallel_for(std::int64_t count, const std::function<void(std::int64_t)>& f,
                         unsigned max_threads = 0) {
  unsigned n = max_threads ? max_threads : std::thread::hardware_concurrency();
  if (n <= 1 || count < 2) {
    for (std::int64_t i = 0; i < count; ++i) f(i);
    return;
  }
  n = std::min<unsigned>(n, static_cast<unsigned>(count));
  std::atomic<std::int64_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(n);
  for (unsigned t = 0; t < n; ++t) {
    pool.emplace_back([&] {
      for (std::int64_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) f(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace vie
