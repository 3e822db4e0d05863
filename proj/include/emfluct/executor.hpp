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

#include <cstddef>
#include <functional>

namespace emfluct {

// Index-range task runner. Library code partitions work through an Executor
// and never spawns threads itself; the harness supplies a pooled one.
//
// Tasks must write only to slots owned by their index range. Reductions are
// done by the caller afterwards, in ascending index order.
class Executor {
 public:
  using RangeTask = std::function<void(std::size_t begin, std::size_t end)>;

  virtual ~Executor() = default;
  virtual void for_ranges(std::size_t n, const RangeTask& task) const = 0;
  virtual std::size_t concurrency() const noexcept { return 1; }
};

class SerialExecutor final : public Executor {
 public:
  void for_ranges(std::size_t n, const RangeTask& task) const override {
    if (n > 0) task(0, n);
  }
};

const Executor& serial_executor() noexcept;

}  // namespace emfluct
