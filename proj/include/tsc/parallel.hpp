#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace tsc {

/// Process-wide worker count used by parallel_for. Defaults to 1.
void set_thread_count(unsigned count);
unsigned thread_count();

namespace detail {
bool& inside_worker();
}

/// Runs fn(i) for i in [0, count). Work is distributed over thread_count()
/// workers; nested calls from a worker run serially. Callers write results
/// by index, so output never depends on scheduling. If several iterations
/// throw, the exception of the lowest index is rethrown.
template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn) {
  const unsigned workers = thread_count();
  if (workers <= 1 || count <= 1 || detail::inside_worker()) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto body = [&] {
    detail::inside_worker() = true;
    for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
    detail::inside_worker() = false;
  };
  const std::size_t spawn = std::min<std::size_t>(workers, count);
  std::vector<std::thread> pool;
  pool.reserve(spawn);
  for (std::size_t t = 0; t < spawn; ++t) pool.emplace_back(body);
  for (auto& thread : pool) thread.join();
  for (auto& error : errors)
    if (error) std::rethrow_exception(error);
}

}  // namespace tsc
