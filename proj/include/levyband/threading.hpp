#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace levyband {

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

// Static block decomposition. Blocks are always the same for a given n, so
// reductions that combine per-block partials in block order are deterministic
// regardless of the thread count.
template <class Fn>
void parallel_blocks(std::size_t n, int threads, std::size_t block, Fn&& fn) {
  if (n == 0) return;
  const std::size_t nblocks = (n + block - 1) / block;
  const int nthreads = std::min<std::size_t>(resolve_threads(threads), nblocks);
  if (nthreads <= 1) {
    for (std::size_t b = 0; b < nblocks; ++b)
      fn(b, b * block, std::min(n, (b + 1) * block));
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  for (int t = 0; t < nthreads; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t b = static_cast<std::size_t>(t); b < nblocks; b += nthreads)
        fn(b, b * block, std::min(n, (b + 1) * block));
    });
  }
  for (auto& th : pool) th.join();
}

// Convenience: one block per index range chunk, no block ids.
template <class Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  const std::size_t block = std::max<std::size_t>(1, n / (4 * std::max(1, resolve_threads(threads))));
  parallel_blocks(n, threads, block, [&](std::size_t, std::size_t lo, std::size_t hi) { fn(lo, hi); });
}

}  // namespace levyband
