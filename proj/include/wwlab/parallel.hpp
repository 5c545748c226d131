#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace wwlab {

// Runs fn(0), ..., fn(n-1) and returns the results ordered by index.
// The worker count affects wall time only, never the output: each slot is
// written exactly once and no aggregation happens here.
template <typename Fn>
auto parallel_map(int n, int threads, Fn&& fn) -> std::vector<decltype(fn(0))> {
  using T = decltype(fn(0));
  std::vector<T> results(n > 0 ? static_cast<std::size_t>(n) : 0u);
  if (n <= 0) return results;

  const int workers = std::min(threads, n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) results[static_cast<std::size_t>(i)] = fn(i);
    return results;
  }

  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (;;) {
      if (failed.load(std::memory_order_relaxed)) return;
      const int i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= n) return;
      try {
        results[static_cast<std::size_t>(i)] = fn(i);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true, std::memory_order_relaxed);
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return results;
}

}  // namespace wwlab
