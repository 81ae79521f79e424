#pragma once

#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace semirank {

// Worker count: explicit argument > SEMIRANK_THREADS env > hardware.
inline int resolve_thread_count(int requested = 0) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("SEMIRANK_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

// Runs fn(i) for i in [0, count). Each index is processed exactly once; the
// result layout is the caller's responsibility (write to slot i), which makes
// the outcome independent of the worker count.
inline void parallel_for_index(std::int64_t count,
                               const std::function<void(std::int64_t)>& fn,
                               int threads = 0) {
  threads = resolve_thread_count(threads);
  if (threads <= 1 || count <= 1) {
    for (std::int64_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::int64_t i = next.fetch_add(1);
      if (i >= count) return;
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  const int spawn = static_cast<int>(std::min<std::int64_t>(threads, count));
  pool.reserve(spawn);
  for (int t = 0; t < spawn - 1; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
}

}  // namespace semirank
