#pragma once

// Fork-join loop over [0, n). Each index is handled by exactly one worker, so
// callers that write only slot i stay deterministic.

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace sclim::detail {

template <class Fn>
void parallel_for(std::size_t n, Fn&& fn, std::size_t min_chunk = 1) {
  const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers = std::min(hw, n / std::max<std::size_t>(1, min_chunk));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w * n / workers; i < (w + 1) * n / workers; ++i) fn(i);
    });
  for (auto& t : pool) t.join();
}

}  // namespace sclim::detail
