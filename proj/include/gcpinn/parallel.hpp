#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace gcpinn {

/// Runs body(task) for task in [0, tasks) on up to `workers` threads.
/// Callers write per-task results into their own slots and reduce them in
/// task order afterwards, which keeps results independent of the worker count.
/// The first exception thrown by any task is rethrown.
template <class Body>
void parallel_for(int tasks, int workers, Body&& body) {
  workers = std::max(1, std::min(workers, tasks));
  if (workers == 1) {
    for (int t = 0; t < tasks; ++t) body(t);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto run = [&] {
    for (int t = next++; t < tasks; t = next++) {
      try {
        body(t);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next = tasks;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace gcpinn
