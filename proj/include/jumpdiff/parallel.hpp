#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace jumpdiff {

// Runs fn(i) for i in [0, n) over `workers` threads in contiguous chunks.
// Callers write results into per-index slots, so output never depends on the
// worker count.
template <typename Fn>
void parallel_for(std::uint64_t n, unsigned workers, Fn&& fn) {
  const std::uint64_t w = std::clamp<std::uint64_t>(workers, 1, std::max<std::uint64_t>(n, 1));
  if (w == 1) {
    for (std::uint64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(w);
  const std::uint64_t chunk = (n + w - 1) / w;
  for (std::uint64_t t = 0; t < w; ++t) {
    const std::uint64_t lo = t * chunk;
    const std::uint64_t hi = std::min(n, lo + chunk);
    pool.emplace_back([&, t, lo, hi] {
      try {
        for (std::uint64_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace jumpdiff
