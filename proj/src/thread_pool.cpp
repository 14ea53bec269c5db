#include "fedmax/thread_pool.hpp"

#include <cstdlib>
#include <string>

namespace fedmax {

ThreadPool::ThreadPool(int workers) {
  const int extra = workers < 1 ? 0 : workers - 1;
  threads_.reserve(static_cast<std::size_t>(extra));
  for (int i = 0; i < extra; ++i) {
    threads_.emplace_back([this] { worker_loop(); });
  }
}

ThreadPool::~ThreadPool() {
  {
    std::lock_guard<std::mutex> lock(mu_);
    stop_ = true;
  }
  cv_start_.notify_all();
  for (auto& t : threads_) t.join();
}

void ThreadPool::worker_loop() {
  std::uint64_t seen = 0;
  for (;;) {
    {
      std::unique_lock<std::mutex> lock(mu_);
      cv_start_.wait(lock, [&] { return stop_ || generation_ != seen; });
      if (stop_) return;
      seen = generation_;
    }
    run_items();
  }
}

void ThreadPool::run_items() {
  for (;;) {
    int idx;
    {
      std::lock_guard<std::mutex> lock(mu_);
      if (next_ >= total_) return;
      idx = next_++;
      ++in_flight_;
    }
    try {
      (*fn_)(idx);
    } catch (...) {
      std::lock_guard<std::mutex> lock(mu_);
      if (!first_error_) first_error_ = std::current_exception();
    }
    {
      std::lock_guard<std::mutex> lock(mu_);
      --in_flight_;
      if (next_ >= total_ && in_flight_ == 0) cv_done_.notify_all();
    }
  }
}

void ThreadPool::parallel_for(int n, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  if (threads_.empty() || n == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  {
    std::lock_guard<std::mutex> lock(mu_);
    fn_ = &fn;
    total_ = n;
    next_ = 0;
    in_flight_ = 0;
    first_error_ = nullptr;
    ++generation_;
  }
  cv_start_.notify_all();
  run_items();
  {
    std::unique_lock<std::mutex> lock(mu_);
    cv_done_.wait(lock, [&] { return next_ >= total_ && in_flight_ == 0; });
    fn_ = nullptr;
    total_ = 0;
    if (first_error_) {
      auto err = first_error_;
      first_error_ = nullptr;
      lock.unlock();
      std::rethrow_exception(err);
    }
  }
}

int ThreadPool::env_default() {
  if (const char* env = std::getenv("FEDMAX_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<int>(v);
    return 1;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace fedmax
