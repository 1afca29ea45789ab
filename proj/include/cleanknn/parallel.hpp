#pragma once

#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace cleanknn {

inline std::uint32_t default_thread_count() {
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : hc;
}

// Static partition of [begin, end) into at most `threads` contiguous chunks.
// Each chunk is processed by exactly one worker, so outputs written to
// disjoint ranges are identical no matter how many threads run.
inline void parallel_for(std::uint64_t begin, std::uint64_t end,
                         std::uint32_t threads,
                         const std::function<void(std::uint64_t, std::uint64_t)>& body) {
  const std::uint64_t n = end > begin ? end - begin : 0;
  if (n == 0) return;
  if (threads <= 1 || n == 1) {
    body(begin, end);
    return;
  }
  const std::uint64_t nchunks = std::min<std::uint64_t>(threads, n);
  const std::uint64_t chunk = (n + nchunks - 1) / nchunks;
  std::vector<std::thread> pool;
  pool.reserve(nchunks);
  for (std::uint64_t c = 0; c < nchunks; ++c) {
    const std::uint64_t lo = begin + c * chunk;
    const std::uint64_t hi = std::min(end, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&body, lo, hi] { body(lo, hi); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace cleanknn
