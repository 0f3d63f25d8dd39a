#pragma once

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace dpbandit {

inline unsigned default_worker_count() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 4 : hw;
}

// Runs body(0) .. body(count-1) across a small worker pool. Bodies must not
// throw and must write only to their own output slots.
template <class Fn>
void parallel_for(std::size_t count, Fn&& body, unsigned workers = 0) {
  if (count == 0) return;
  if (workers == 0) workers = default_worker_count();
  if (workers > count) workers = static_cast<unsigned>(count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < count;) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace dpbandit
