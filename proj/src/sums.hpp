#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

namespace gibbsfit {

/// Pairwise (tree) summation; the reduction order depends only on the array
/// length, so results are bit-reproducible.
inline double pairwise_sum(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

/// Runs fn(block_index, begin, end) over fixed-size blocks of [0, count).
/// The block layout is independent of the thread count, so per-block outputs
/// combined in block order are bit-reproducible.
inline void parallel_blocks(
    std::size_t count, std::size_t block_size, int threads,
    const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
  if (count == 0) return;
  const std::size_t blocks = (count + block_size - 1) / block_size;
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads) : hw;
  workers = std::min<std::size_t>({workers, blocks});
  if (workers <= 1) {
    for (std::size_t b = 0; b < blocks; ++b) {
      const std::size_t lo = b * block_size;
      fn(b, lo, std::min(count, lo + block_size));
    }
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      try {
        for (std::size_t b = w; b < blocks; b += workers) {
          const std::size_t lo = b * block_size;
          fn(b, lo, std::min(count, lo + block_size));
        }
      } catch (...) {
        const std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace gibbsfit
