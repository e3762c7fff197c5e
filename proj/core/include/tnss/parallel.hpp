#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace tnss {

/// Runs f(i) for i in [0, count) on up to `workers` threads. Jobs write to
/// their own slots, so results never depend on scheduling. The exception of
/// the lowest failing index is rethrown after all workers stop.
template <typename F>
void parallel_for(std::size_t count, std::size_t workers, F&& f) {
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::mutex mu;
  std::exception_ptr error;
  std::size_t error_index = count;
  auto run = [&] {
    for (std::size_t i = next++; i < count && !stop; i = next++) {
      try {
        f(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
        stop = true;
      }
    }
  };
  std::vector<std::thread> pool;
  const std::size_t n = workers < count ? workers : count;
  for (std::size_t t = 0; t < n; ++t) pool.emplace_back(run);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace tnss
