#pragma once

#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace reverbmatch {

/// Number of worker threads used by the data-parallel loops (kernel build,
/// operator application, Monte-Carlo draws). 0 selects the hardware count.
void set_num_threads(unsigned n);
unsigned num_threads();

namespace detail {
// Set inside parallel_for workers; nested loops then run serially.
inline thread_local bool in_parallel_region = false;
}  // namespace detail

/// Calls fn(i) for every i in [begin, end). Indices are split into contiguous
/// chunks, one per worker. Each index must write only to its own output slot;
/// results are then independent of the thread count.
template <class Fn>
void parallel_for(std::size_t begin, std::size_t end, Fn&& fn) {
  if (end <= begin) return;
  const std::size_t count = end - begin;
  const std::size_t workers = std::min<std::size_t>(num_threads(), count);
  if (workers <= 1 || detail::in_parallel_region) {
    for (std::size_t i = begin; i < end; ++i) fn(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t lo = begin + count * w / workers;
      const std::size_t hi = begin + count * (w + 1) / workers;
      pool.emplace_back([&, lo, hi] {
        detail::in_parallel_region = true;
        try {
          for (std::size_t i = lo; i < hi; ++i) fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace reverbmatch
