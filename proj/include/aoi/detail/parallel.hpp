#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace aoi::detail {

/// Runs fn(begin, end) over contiguous chunks of [0, n).
///
/// Chunk boundaries depend only on n and the worker count, and every chunk
/// writes disjoint indices, so results do not depend on thread scheduling.
/// workers == 0 uses hardware_concurrency; workers == 1 runs inline.
inline void parallel_for(std::size_t n, unsigned workers,
                         const std::function<void(std::size_t, std::size_t)>& fn) {
  if (n == 0) return;
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t k = std::min<std::size_t>(workers, n);
  if (k <= 1) {
    fn(0, n);
    return;
  }
  const std::size_t chunk = (n + k - 1) / k;
  std::vector<std::thread> pool;
  pool.reserve(k);
  for (std::size_t w = 0; w < k; ++w) {
    const std::size_t b = w * chunk;
    const std::size_t e = std::min(n, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&fn, b, e] { fn(b, e); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace aoi::detail
