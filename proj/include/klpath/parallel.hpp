#pragma once

// Deterministic data-parallel reductions.
//
// Work is cut into fixed-size blocks that do not depend on the thread count.
// Each block is reduced sequentially, and block results are merged in a fixed
// pairwise tree, so the floating-point result is identical for any number of
// workers.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace klpath {

// Worker count used when none is passed explicitly: KLPATH_THREADS if set,
// otherwise the number of logical cores.
unsigned default_thread_count();
// 0 restores the environment/hardware default.
void set_default_thread_count(unsigned threads);

// Runs fn(block_index, begin, end) for every block of [0, count).
template <class Fn>
void for_each_block(std::uint64_t count, std::uint64_t block_size, Fn&& fn,
                    unsigned threads = default_thread_count()) {
  if (count == 0) return;
  block_size = std::max<std::uint64_t>(block_size, 1);
  const std::uint64_t blocks = (count + block_size - 1) / block_size;
  auto run = [&](std::uint64_t b) { fn(b, b * block_size, std::min(count, (b + 1) * block_size)); };
  const unsigned workers = static_cast<unsigned>(std::min<std::uint64_t>(std::max(threads, 1U), blocks));
  if (workers <= 1) {
    for (std::uint64_t b = 0; b < blocks; ++b) run(b);
    return;
  }
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::uint64_t b = next++; b < blocks; b = next++) {
        try {
          run(b);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = blocks;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

// Reduces block results block_fn(begin, end) -> T with combine(T, T) -> T.
template <class T, class BlockFn, class Combine>
T block_reduce(std::uint64_t count, std::uint64_t block_size, BlockFn&& block_fn, Combine&& combine,
               T identity, unsigned threads = default_thread_count()) {
  if (count == 0) return identity;
  block_size = std::max<std::uint64_t>(block_size, 1);
  const std::uint64_t blocks = (count + block_size - 1) / block_size;
  std::vector<T> partial(blocks, identity);
  for_each_block(
      count, block_size,
      [&](std::uint64_t b, std::uint64_t begin, std::uint64_t end) { partial[b] = block_fn(begin, end); },
      threads);
  for (std::size_t width = 1; width < partial.size(); width *= 2) {
    for (std::size_t i = 0; i + width < partial.size(); i += 2 * width) {
      partial[i] = combine(partial[i], partial[i + width]);
    }
  }
  return partial[0];
}

}  // namespace klpath
