// Deterministic parallel map-reduce. Work is split into fixed-size blocks;
// each block's partial result lands in a slot indexed by block number and the
// slots are reduced in block order after the join. Results are therefore
// bit-identical for any thread count.
#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace lerwlab {

inline constexpr std::uint64_t kDefaultBlock = 1024;

int default_thread_count();  // LERW_THREADS env var, else hardware_concurrency

// per_block(begin, end, block_index) -> R; combine(acc, R) folds in order.
template <class R, class PerBlock, class Combine>
R parallel_block_reduce(std::uint64_t n_items, int n_threads,
                        std::uint64_t block_size, R init, PerBlock per_block,
                        Combine combine) {
  if (n_items == 0) return init;
  if (block_size == 0) block_size = kDefaultBlock;
  std::uint64_t n_blocks = (n_items + block_size - 1) / block_size;
  std::vector<R> slots(n_blocks, init);
  auto run_block = [&](std::uint64_t b) {
    std::uint64_t lo = b * block_size;
    std::uint64_t hi = std::min(n_items, lo + block_size);
    slots[b] = per_block(lo, hi, b);
  };
  if (n_threads <= 1 || n_blocks == 1) {
    for (std::uint64_t b = 0; b < n_blocks; ++b) run_block(b);
  } else {
    std::atomic<std::uint64_t> next{0};
    auto worker = [&] {
      for (std::uint64_t b = next.fetch_add(1); b < n_blocks; b = next.fetch_add(1))
        run_block(b);
    };
    std::vector<std::thread> pool;
    int t = static_cast<int>(std::min<std::uint64_t>(n_threads, n_blocks));
    pool.reserve(static_cast<size_t>(t));
    for (int i = 0; i < t; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  R acc = init;
  for (std::uint64_t b = 0; b < n_blocks; ++b) acc = combine(acc, slots[b]);
  return acc;
}

}  // namespace lerwlab
