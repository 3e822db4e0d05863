// Copyright 2026 The emfluct Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <condition_variable>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "emfluct/executor.hpp"

namespace emfluct::harness {

// Fixed pool of worker threads behind the Executor interface. [0, n) is cut
// into contiguous chunks that depend only on n and the pool size, so slot
// writes and the caller's ordered reduction are thread-count invariant.
// If several chunks throw, the exception from the lowest chunk is rethrown.
//
// for_ranges is not reentrant: a task must not call back into the same pool.
class ThreadPoolExecutor final : public Executor {
 public:
  explicit ThreadPoolExecutor(std::size_t threads);
  ~ThreadPoolExecutor() override;

  ThreadPoolExecutor(const ThreadPoolExecutor&) = delete;
  ThreadPoolExecutor& operator=(const ThreadPoolExecutor&) = delete;

  void for_ranges(std::size_t n, const RangeTask& task) const override;
  std::size_t concurrency() const noexcept override { return threads_; }

 private:
  struct Job {
    const RangeTask* task = nullptr;
    std::size_t n = 0;
    std::size_t chunk = 0;
    std::size_t chunks = 0;
    std::size_t next = 0;
    std::size_t done = 0;
    std::vector<std::exception_ptr> errors;
  };

  void worker_loop();
  // Runs chunks of the current job until none are left. Caller holds `lock`.
  void drain(std::unique_lock<std::mutex>& lock) const;

  std::size_t threads_;
  mutable std::mutex mutex_;
  mutable std::condition_variable wake_;
  mutable std::condition_variable finished_;
  mutable Job job_;
  mutable std::size_t generation_ = 0;
  mutable std::mutex submit_;
  bool stopping_ = false;
  std::vector<std::thread> workers_;
};

}  // namespace emfluct::harness
