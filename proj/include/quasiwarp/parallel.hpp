#pragma once

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace quasiwarp {

/// Worker cap from QUASIWARP_THREADS, defaulting to the hardware count.
inline unsigned thread_budget() {
  static const unsigned budget = [] {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("QUASIWARP_THREADS")) {
      const long v = std::strtol(env, nullptr, 10);
      if (v >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(v));
    }
    return n;
  }();
  return budget;
}

/// Runs fn(i) for i in [begin, end) on contiguous index blocks. Each index
/// must write only its own output slots.
template <class F>
void parallel_for(int begin, int end, F&& fn) {
  const int count = end - begin;
  if (count <= 0) return;
  const unsigned workers =
      std::min<unsigned>(thread_budget(), static_cast<unsigned>(count));
  if (workers <= 1 || count < 4) {
    for (int i = begin; i < end; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const int chunk = (count + static_cast<int>(workers) - 1) / static_cast<int>(workers);
  for (unsigned w = 0; w < workers; ++w) {
    const int lo = begin + static_cast<int>(w) * chunk;
    const int hi = std::min(end, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (int i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace quasiwarp
