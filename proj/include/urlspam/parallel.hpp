#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace urlspam {

namespace detail {
inline std::atomic<unsigned>& thread_setting() {
  static std::atomic<unsigned> value{0};
  return value;
}
inline thread_local bool in_parallel_region = false;
}  // namespace detail

/// Worker count for parallel_for; 0 selects hardware concurrency.
inline void set_thread_count(unsigned n) { detail::thread_setting().store(n); }

inline unsigned thread_count() {
  const unsigned n = detail::thread_setting().load();
  if (n != 0) return n;
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(i) for i in [0, n). Each index is written only by its own call,
/// so results never depend on the worker count or scheduling. Nested calls
/// run inline on the calling worker.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
  const std::size_t workers = detail::in_parallel_region ? 1 : std::min<std::size_t>(thread_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto run = [&] {
    const bool outer = detail::in_parallel_region;
    detail::in_parallel_region = true;
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
    detail::in_parallel_region = outer;
  };
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  pool.clear();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace urlspam
