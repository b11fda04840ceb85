#pragma once

#include <condition_variable>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace fxlearn {

// Persistent pool running index-based jobs from a single submitting thread.
// Tasks must write to disjoint slots; reductions happen serially on the
// caller so results do not depend on the worker count or scheduling.
// Index claims go through the mutex: jobs here are millisecond-scale DSP and
// net passes, so the lock is never the bottleneck and stale workers can be
// fenced off by generation.
class WorkerPool {
 public:
  explicit WorkerPool(int workers) {
    int extra = workers > 1 ? workers - 1 : 0;  // caller thread works too
    threads_.reserve(static_cast<std::size_t>(extra));
    for (int i = 0; i < extra; ++i) {
      threads_.emplace_back([this] { worker_loop(); });
    }
  }

  ~WorkerPool() {
    {
      std::lock_guard<std::mutex> lk(mu_);
      stop_ = true;
    }
    cv_.notify_all();
    for (auto& t : threads_) t.join();
  }

  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  int size() const { return static_cast<int>(threads_.size()) + 1; }

  void parallel_for(int n, const std::function<void(int)>& fn) {
    if (n <= 0) return;
    if (threads_.empty() || n == 1) {
      for (int i = 0; i < n; ++i) fn(i);
      return;
    }
    std::uint64_t gen;
    {
      std::lock_guard<std::mutex> lk(mu_);
      fn_ = &fn;
      next_ = 0;
      total_ = n;
      pending_ = n;
      error_ = nullptr;
      gen = ++generation_;
    }
    cv_.notify_all();
    run_indices(gen);
    std::unique_lock<std::mutex> lk(mu_);
    done_cv_.wait(lk, [this] { return pending_ == 0; });
    fn_ = nullptr;
    total_ = 0;
    if (error_) std::rethrow_exception(error_);
  }

 private:
  void run_indices(std::uint64_t gen) {
    while (true) {
      const std::function<void(int)>* fn = nullptr;
      int i = 0;
      {
        std::lock_guard<std::mutex> lk(mu_);
        if (stop_ || generation_ != gen || fn_ == nullptr || next_ >= total_) return;
        i = next_++;
        fn = fn_;
      }
      try {
        (*fn)(i);
      } catch (...) {
        std::lock_guard<std::mutex> lk(mu_);
        if (!error_) error_ = std::current_exception();
      }
      std::lock_guard<std::mutex> lk(mu_);
      if (generation_ == gen && --pending_ == 0) done_cv_.notify_all();
    }
  }

  void worker_loop() {
    std::uint64_t seen = 0;
    while (true) {
      std::uint64_t gen;
      {
        std::unique_lock<std::mutex> lk(mu_);
        cv_.wait(lk, [&] { return stop_ || (fn_ != nullptr && generation_ != seen); });
        if (stop_) return;
        seen = generation_;
        gen = generation_;
      }
      run_indices(gen);
    }
  }

  std::vector<std::thread> threads_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::condition_variable done_cv_;
  const std::function<void(int)>* fn_ = nullptr;
  int next_ = 0;
  int total_ = 0;
  int pending_ = 0;
  std::uint64_t generation_ = 0;
  bool stop_ = false;
  std::exception_ptr error_;
};

}  // namespace fxlearn
