#pragma once

// Deterministic parallel map: each index writes its own result slot, so the
// output is independent of the thread schedule. Reductions stay sequential.

#include <cstddef>
#include <thread>
#include <vector>

namespace repmax {

inline unsigned default_threads() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : n;
}

template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  if (n == 0) return;
  if (threads <= 1 || n == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const unsigned used = static_cast<unsigned>(
      std::min<std::size_t>(threads, n));
  std::vector<std::thread> pool;
  pool.reserve(used);
  for (unsigned t = 0; t < used; ++t) {
    pool.emplace_back([t, used, n, &fn] {
      for (std::size_t i = t; i < n; i += used) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace repmax
