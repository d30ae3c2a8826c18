#pragma once

#include <condition_variable>
#include <cstdint>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace asv {

/// Persistent pool running static contiguous partitions of an index range.
/// With <= 1 workers everything runs inline on the caller. Not reentrant:
/// a parallel_for body must not call parallel_for on the same pool.
///
/// Work is partitioned by index only, so callers that keep per-index state
/// disjoint get results independent of the worker count by construction.
class WorkerPool {
 public:
  explicit WorkerPool(int workers) {
    n_workers_ = workers < 1 ? 1 : workers;
    threads_.reserve(n_workers_ - 1);
    for (int i = 1; i < n_workers_; ++i)
      threads_.emplace_back([this, i] { worker_loop(i); });
  }

  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  ~WorkerPool() {
    {
      std::lock_guard<std::mutex> lk(m_);
      stop_ = true;
    }
    cv_.notify_all();
    for (auto& t : threads_) t.join();
  }

  int workers() const { return n_workers_; }

  static int resolve_workers(int requested) {
    if (requested > 0) return requested;
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
  }

  /// body(begin, end) over a static partition of [0, n).
  void parallel_for(std::int64_t n,
                    const std::function<void(std::int64_t, std::int64_t)>&
                        body) {
    if (n <= 0) return;
    if (n_workers_ == 1 || n == 1) {
      body(0, n);
      return;
    }
    {
      std::lock_guard<std::mutex> lk(m_);
      body_ = &body;
      total_ = n;
      pending_ = n_workers_ - 1;
      ++generation_;
    }
    cv_.notify_all();
    run_chunk(0);
    std::unique_lock<std::mutex> lk(m_);
    done_cv_.wait(lk, [this] { return pending_ == 0; });
    body_ = nullptr;
  }

 private:
  void run_chunk(int idx) {
    const std::int64_t chunk = (total_ + n_workers_ - 1) / n_workers_;
    const std::int64_t b = idx * chunk;
    const std::int64_t e = std::min<std::int64_t>(total_, b + chunk);
    if (b < e) (*body_)(b, e);
  }

  void worker_loop(int idx) {
    std::uint64_t seen = 0;
    for (;;) {
      std::unique_lock<std::mutex> lk(m_);
      cv_.wait(lk, [&] { return stop_ || generation_ != seen; });
      if (stop_) return;
      seen = generation_;
      lk.unlock();
      run_chunk(idx);
      lk.lock();
      if (--pending_ == 0) {
        lk.unlock();
        done_cv_.notify_one();
      }
    }
  }

  std::vector<std::thread> threads_;
  int n_workers_ = 1;
  std::mutex m_;
  std::condition_variable cv_, done_cv_;
  const std::function<void(std::int64_t, std::int64_t)>* body_ = nullptr;
  std::int64_t total_ = 0;
  int pending_ = 0;
  std::uint64_t generation_ = 0;
  bool stop_ = false;
};

}  // namespace asv
