#pragma once

#include <condition_variable>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace fedmax {

// Minimal persistent worker pool for running the per-client loops of a
// communication window in parallel. Work items are independent (one logical
// client each), so scheduling order cannot change results.
class ThreadPool {
 public:
  explicit ThreadPool(int workers);
  ~ThreadPool();

  ThreadPool(const ThreadPool&) = delete;
  ThreadPool& operator=(const ThreadPool&) = delete;

  // Runs fn(i) for i in [0, n); blocks until all complete. The calling
  // thread participates. The first exception thrown by any item is
  // rethrown here.
  void parallel_for(int n, const std::function<void(int)>& fn);

  int workers() const { return static_cast<int>(threads_.size()) + 1; }

  // FEDMAX_THREADS if set (clamped to >= 1), else hardware concurrency.
  static int env_default();

 private:
  void worker_loop();
  void run_items();

  std::vector<std::thread> threads_;
  std::mutex mu_;
  std::condition_variable cv_start_;
  std::condition_variable cv_done_;
  const std::function<void(int)>* fn_ = nullptr;
  int total_ = 0;
  int next_ = 0;
  int in_flight_ = 0;
  std::uint64_t generation_ = 0;
  bool stop_ = false;
  std::exception_ptr first_error_;
};

}  // namespace fedmax
