#pragma once

#include <condition_variable>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace flowbp {

// Fixed set of threads splitting an index range into equal static chunks.
// Chunk boundaries depend only on the range and the pool size, and if
// several chunks throw, the exception from the lowest chunk wins.
class WorkerPool {
 public:
  explicit WorkerPool(unsigned threads) : size_(threads == 0 ? 1 : threads) {
    for (unsigned i = 1; i < size_; ++i) workers_.emplace_back([this, i] { loop(i); });
  }
  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;
  ~WorkerPool() {
    {
      std::lock_guard lk(m_);
      stop_ = true;
      ++generation_;
    }
    cv_.notify_all();
    for (auto& t : workers_) t.join();
  }

  unsigned size() const { return size_; }

  void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body) {
    if (size_ == 1 || n < 2) {
      body(0, n);
      return;
    }
    {
      std::lock_guard lk(m_);
      body_ = &body;
      n_ = n;
      pending_ = size_ - 1;
      errors_.assign(size_, nullptr);
      ++generation_;
    }
    cv_.notify_all();
    run_chunk(0);
    std::unique_lock lk(m_);
    done_.wait(lk, [this] { return pending_ == 0; });
    for (auto& e : errors_) {
      if (e) std::rethrow_exception(e);
    }
  }

 private:
  void loop(unsigned idx) {
    std::uint64_t seen = 0;
    for (;;) {
      {
        std::unique_lock lk(m_);
        cv_.wait(lk, [&] { return generation_ != seen; });
        seen = generation_;
        if (stop_) return;
      }
      run_chunk(idx);
      std::lock_guard lk(m_);
      if (--pending_ == 0) done_.notify_one();
    }
  }

  void run_chunk(unsigned idx) {
    const std::size_t begin = n_ * idx / size_;
    const std::size_t end = n_ * (idx + 1) / size_;
    try {
      (*body_)(begin, end);
    } catch (...) {
      errors_[idx] = std::current_exception();
    }
  }

  unsigned size_;
  std::vector<std::thread> workers_;
  std::mutex m_;
  std::condition_variable cv_;
  std::condition_variable done_;
  std::uint64_t generation_ = 0;
  bool stop_ = false;
  unsigned pending_ = 0;
  std::size_t n_ = 0;
  const std::function<void(std::size_t, std::size_t)>* body_ = nullptr;
  std::vector<std::exception_ptr> errors_;
};

}  // namespace flowbp
