#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace wish {

// Runs `count` independent tasks to completion. Implementations may order
// and interleave tasks arbitrarily; callers key results by task index, so
// scheduling can never change what a run computes.
class Executor {
 public:
  virtual ~Executor() = default;
  virtual void run(std::size_t count, const std::function<void(std::size_t)>& task) = 0;
};

class SerialExecutor final : public Executor {
 public:
  void run(std::size_t count, const std::function<void(std::size_t)>& task) override {
    for (std::size_t k = 0; k < count; ++k) task(k);
  }
};

// Fixed-size worker pool over an atomic work counter. jobs = 0 means use
// the hardware concurrency.
class ThreadPoolExecutor final : public Executor {
 public:
  explicit ThreadPoolExecutor(unsigned jobs = 0) : jobs_(jobs) {}

  void run(std::size_t count, const std::function<void(std::size_t)>& task) override {
    unsigned jobs = jobs_ ? jobs_ : std::max(1u, std::thread::hardware_concurrency());
    if (jobs > count) jobs = static_cast<unsigned>(count);
    if (jobs <= 1) {
      for (std::size_t k = 0; k < count; ++k) task(k);
      return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;
    auto worker = [&] {
      std::size_t k;
      while ((k = next.fetch_add(1)) < count) {
        try {
          task(k);
        } catch (...) {
          const std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    };
    std::vector<std::thread> threads;
    threads.reserve(jobs);
    for (unsigned j = 0; j < jobs; ++j) threads.emplace_back(worker);
    for (std::thread& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
  }

 private:
  unsigned jobs_;
};

}  // namespace wish
