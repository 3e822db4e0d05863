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

#include <array>
#include <cstdint>
#include <span>
#include <string_view>

namespace emfluct {

// Philox4x32 with 10 rounds (Salmon et al., SC'11). Stateless bijection of a
// 128-bit counter under a 64-bit key.
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter apply(Counter ctr, Key key) noexcept;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

enum class NoiseAlgorithm {
  philox4x32_10_box_muller,
  // Deterministic all-zero noise, used to run the noiseless recursion.
  zero,
};

std::string_view algorithm_id(NoiseAlgorithm algorithm) noexcept;

// Counter-addressed source of i.i.d. standard normal vectors.
//
// The vector with counter c in dimension d consists of the normals with
// global indices c*d .. c*d+d-1. Normal index j is lane (j mod 2) of the
// Box-Muller pair computed from Philox block j/2 with counter words
// (block_lo, block_hi, replica_lo, replica_hi) and key splitmix64(master_seed).
// The result depends only on (master_seed, replica_index, counter, d).
class NoiseStream {
 public:
  NoiseStream() = default;
  explicit NoiseStream(std::uint64_t master_seed, std::uint64_t replica_index = 0,
                       NoiseAlgorithm algorithm = NoiseAlgorithm::philox4x32_10_box_muller);

  static NoiseStream zeros() { return NoiseStream(0, 0, NoiseAlgorithm::zero); }

  std::uint64_t master_seed() const noexcept { return master_seed_; }
  std::uint64_t replica_index() const noexcept { return replica_index_; }
  std::uint64_t counter() const noexcept { return counter_; }
  NoiseAlgorithm algorithm() const noexcept { return algorithm_; }
  std::string_view algorithm_tag() const noexcept { return algorithm_id(algorithm_); }

  // Same master seed and algorithm, another replica, counter reset to zero.
  NoiseStream for_replica(std::uint64_t replica_index) const;
  // Independent family of replica streams for a different purpose.
  NoiseStream fork(std::uint64_t salt) const;

  void set_counter(std::uint64_t counter) noexcept { counter_ = counter; }

  void normal_vector_at(std::uint64_t counter, std::span<double> out) const noexcept;
  // Draws the vector at the current counter and advances it by one.
  void next_normal(std::span<double> out) noexcept { normal_vector_at(counter_++, out); }

  // Uniform (0,1) vectors, addressed like the normals but in a disjoint stream.
  void uniform_vector_at(std::uint64_t counter, std::span<double> out) const noexcept;
  void next_uniform(std::span<double> out) noexcept { uniform_vector_at(counter_++, out); }

 private:
  double normal_at(std::uint64_t index) const noexcept;

  std::uint64_t master_seed_ = 0;
  std::uint64_t replica_index_ = 0;
  std::uint64_t counter_ = 0;
  NoiseAlgorithm algorithm_ = NoiseAlgorithm::philox4x32_10_box_muller;
  Philox4x32::Key key_{};

  // Last Box-Muller pair; sequential 1-d draws use both lanes of each block.
  mutable std::uint64_t cached_block_ = ~std::uint64_t{0};
  mutable std::array<double, 2> cached_pair_{};
};

}  // namespace emfluct
