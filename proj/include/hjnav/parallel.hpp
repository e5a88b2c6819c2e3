#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace hjnav {

/// Worker count: HJNAV_WORKERS env var if set, else hardware concurrency.
inline int worker_count() {
  if (const char* env = std::getenv("HJNAV_WORKERS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

namespace detail {

/// Persistent worker pool. Work items are claimed via an atomic counter;
/// outputs must go to disjoint slots, so scheduling order never affects
/// results. Nested calls from inside a pool job run serially.
class ThreadPool {
 public:
  static ThreadPool& instance() {
    static ThreadPool pool;
    return pool;
  }

  void run(int n, const std::function<void(int)>& fn, int workers) {
    if (n <= 0) return;
    if (workers <= 1 || n == 1 || in_pool_job()) {
      run_serial(n, fn);
      return;
    }
    std::lock_guard<std::mutex> job_lock(job_mutex_);
    ensure_threads(workers - 1);

    {
      std::lock_guard<std::mutex> lock(state_mutex_);
      fn_ = &fn;
      n_ = n;
      next_.store(0, std::memory_order_relaxed);
      pending_ = std::min(workers - 1, static_cast<int>(threads_.size()));
      running_ = pending_;
      error_ = nullptr;
      ++generation_;
    }
    work_ready_.notify_all();

    work(fn, n);  // caller participates

    {
      std::unique_lock<std::mutex> lock(state_mutex_);
      all_done_.wait(lock, [&] { return running_ == 0; });
      fn_ = nullptr;
      if (error_) {
        std::exception_ptr err = error_;
        error_ = nullptr;
        lock.unlock();
        std::rethrow_exception(err);
      }
    }
  }

  ~ThreadPool() {
    {
      std::lock_guard<std::mutex> lock(state_mutex_);
      stop_ = true;
    }
    work_ready_.notify_all();
    for (auto& t : threads_) t.join();
  }

 private:
  static bool& in_pool_job() {
    thread_local bool flag = false;
    return flag;
  }

  void run_serial(int n, const std::function<void(int)>& fn) {
    for (int i = 0; i < n; ++i) fn(i);
  }

  void work(const std::function<void(int)>& fn, int n) {
    in_pool_job() = true;
    try {
      for (int i = next_.fetch_add(1, std::memory_order_relaxed); i < n;
           i = next_.fetch_add(1, std::memory_order_relaxed)) {
        fn(i);
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(state_mutex_);
      if (!error_) error_ = std::current_exception();
    }
    in_pool_job() = false;
  }

  void ensure_threads(int count) {
    std::lock_guard<std::mutex> lock(state_mutex_);
    while (static_cast<int>(threads_.size()) < count) {
      threads_.emplace_back([this] { worker_loop(); });
    }
  }

  void worker_loop() {
    std::uint64_t seen = 0;
    for (;;) {
      const std::function<void(int)>* fn = nullptr;
      int n = 0;
      {
        std::unique_lock<std::mutex> lock(state_mutex_);
        work_ready_.wait(lock, [&] {
          return stop_ || (generation_ != seen && pending_ > 0 && fn_ != nullptr);
        });
        if (stop_) return;
        seen = generation_;
        if (pending_ <= 0 || fn_ == nullptr) continue;
        --pending_;
        fn = fn_;
        n = n_;
      }
      work(*fn, n);
      {
        std::lock_guard<std::mutex> lock(state_mutex_);
        if (--running_ == 0) all_done_.notify_all();
      }
    }
  }

  std::mutex job_mutex_;  // serializes whole jobs
  std::mutex state_mutex_;
  std::condition_variable work_ready_;
  std::condition_variable all_done_;
  std::vector<std::thread> threads_;
  const std::function<void(int)>* fn_ = nullptr;
  std::atomic<int> next_{0};
  int n_ = 0;
  int pending_ = 0;
  int running_ = 0;
  std::uint64_t generation_ = 0;
  std::exception_ptr error_;
  bool stop_ = false;
};

}  // namespace detail

/// Runs fn(i) for i in [0, n) on up to `workers` threads (0 = default).
/// Iterations must write to disjoint slots; callers needing bit-exact
/// results reduce outputs in a fixed order afterwards.
inline void parallel_for(int n, const std::function<void(int)>& fn, int workers = 0) {
  if (workers <= 0) workers = worker_count();
  detail::ThreadPool::instance().run(n, fn, workers);
}

}  // namespace hjnav
