#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

namespace cdlab {

struct Parallel {
  unsigned workers = 1;
};

/// Calls body(k) for k in [0, count) on up to `workers` threads. Work is
/// split into contiguous static chunks; callers write results into slots
/// indexed by k so the outcome never depends on the schedule.
template <class Body>
void parallel_for(std::size_t count, Parallel par, Body&& body) {
  const std::size_t workers = std::clamp<std::size_t>(par.workers, 1, std::max<std::size_t>(count, 1));
  if (workers == 1) {
    for (std::size_t k = 0; k < count; ++k) body(k);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = count * w / workers;
      const std::size_t end = count * (w + 1) / workers;
      threads.emplace_back([&, begin, end] {
        try {
          for (std::size_t k = begin; k < end; ++k) body(k);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

/// Pairwise (tree) summation by index. Deterministic for a given input
/// order and with O(log n) error growth.
inline double pairwise_sum(std::span<const double> xs) {
  if (xs.size() <= 8) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

}  // namespace cdlab
