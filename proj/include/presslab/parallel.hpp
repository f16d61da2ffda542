#pragma once

#include <cstddef>
#include <cstdlib>
#include <thread>
#include <vector>

namespace presslab {

// Worker count: hardware concurrency capped by PRESSLAB_THREADS (if set).
inline std::size_t thread_count() {
  std::size_t n = std::thread::hardware_concurrency();
  if (n == 0) n = 1;
  if (const char* env = std::getenv("PRESSLAB_THREADS")) {
    long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1 && static_cast<std::size_t>(cap) < n) n = static_cast<std::size_t>(cap);
  }
  return n;
}

// Runs fn(i) for i in [0, count). Each index writes only its own output slot,
// so results are identical for any worker count; reductions happen afterwards
// in index order.
template <class Fn>
void parallel_for(std::size_t count, Fn&& fn, std::size_t serial_threshold = 128) {
  std::size_t workers = thread_count();
  if (workers <= 1 || count <= serial_threshold) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  if (workers > count) workers = count;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::size_t chunk = (count + workers - 1) / workers;
  for (std::size_t t = 0; t < workers; ++t) {
    std::size_t lo = t * chunk;
    std::size_t hi = lo + chunk < count ? lo + chunk : count;
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace presslab
