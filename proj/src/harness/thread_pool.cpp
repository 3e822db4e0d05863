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

#include "emfluct/harness/thread_pool.hpp"

#include <algorithm>

#include "emfluct/error.hpp"

namespace emfluct::harness {

ThreadPoolExecutor::ThreadPoolExecutor(std::size_t threads) : threads_(threads) {
  require(threads >= 1, "ThreadPoolExecutor: need at least one thread");
  // The calling thread takes part in every job, so spawn threads - 1.
  workers_.reserve(threads - 1);
  for (std::size_t i = 1; i < threads; ++i) workers_.emplace_back([this] { worker_loop(); });
}

ThreadPoolExecutor::~ThreadPoolExecutor() {
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
  }
  wake_.notify_all();
  for (auto& w : workers_) w.join();
}

void ThreadPoolExecutor::drain(std::unique_lock<std::mutex>& lock) const {
  while (job_.task && job_.next < job_.chunks) {
    const std::size_t c = job_.next++;
    const std::size_t begin = c * job_.chunk;
    const std::size_t end = std::min(job_.n, begin + job_.chunk);
    const RangeTask* task = job_.task;
    lock.unlock();
    std::exception_ptr error;
    try {
      (*task)(begin, end);
    } catch (...) {
      error = std::current_exception();
    }
    lock.lock();
    job_.errors[c] = error;
    if (++job_.done == job_.chunks) finished_.notify_all();
  }
}

void ThreadPoolExecutor::worker_loop() {
  std::unique_lock lock(mutex_);
  std::size_t seen = 0;
  for (;;) {
    wake_.wait(lock, [&] { return stopping_ || generation_ != seen; });
    if (stopping_) return;
    seen = generation_;
    drain(lock);
  }
}

void ThreadPoolExecutor::for_ranges(std::size_t n, const RangeTask& task) const {
  if (n == 0) return;
  if (threads_ == 1) {
    task(0, n);
    return;
  }
  std::lock_guard submit(submit_);
  std::unique_lock lock(mutex_);
  // Several chunks per thread keep uneven replicas from idling workers.
  const std::size_t target = std::min(n, threads_ * 8);
  job_.task = &task;
  job_.n = n;
  job_.chunk = (n + target - 1) / target;
  job_.chunks = (n + job_.chunk - 1) / job_.chunk;
  job_.next = 0;
  job_.done = 0;
  job_.errors.assign(job_.chunks, nullptr);
  ++generation_;
  wake_.notify_all();
  drain(lock);
  finished_.wait(lock, [&] { return job_.done == job_.chunks; });
  job_.task = nullptr;
  std::exception_ptr first;
  for (auto& e : job_.errors)
    if (e) {
      first = e;
      break;
    }
  lock.unlock();
  if (first) std::rethrow_exception(first);
}

}  // namespace emfluct::harness
