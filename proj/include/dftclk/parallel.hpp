// Index-parallel loop with a fixed worker count. Each index is processed
// exactly once; callers write results into per-index slots so the outcome does
// not depend on scheduling.
#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace dftclk {

/// Calls fn(index, worker) for every index in [0, count). `worker` is in
/// [0, workers) and identifies per-thread scratch space.
template <class Fn>
void parallel_for(std::size_t count, unsigned jobs, Fn&& fn)
{
  const unsigned workers = static_cast<unsigned>(std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(count, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i, 0U);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = next++; i < count; i = next++) fn(i, w);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next = count;
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

/// Worker count actually used by parallel_for for `count` items.
inline unsigned effective_workers(std::size_t count, unsigned jobs)
{
  return static_cast<unsigned>(std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(count, 1)));
}

}  // namespace dftclk
