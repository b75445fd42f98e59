#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace mhdblow {

/// Runs body(k) for k in [0, n) split into contiguous chunks over `threads` workers.
/// Each index is written by exactly one worker, so results do not depend on the split.
template <class Body>
void parallel_for(std::size_t n, unsigned threads, Body&& body) {
  if (threads <= 1 || n < 2 * static_cast<std::size_t>(threads)) {
    for (std::size_t k = 0; k < n; ++k) body(k);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    const std::size_t chunk = (n + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const std::size_t lo = t * chunk, hi = std::min(n, lo + chunk);
      pool.emplace_back([&, t, lo, hi] {
        try {
          for (std::size_t k = lo; k < hi; ++k) body(k);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace mhdblow
