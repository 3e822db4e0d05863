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

#include "emfluct/rng.hpp"

#include <cmath>
#include <numbers>

namespace emfluct {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

constexpr std::uint64_t kUniformDomain = 0x5bd1e9955bd1e995ull;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

// (0,1) with 53 random bits; never returns 0 so log() is safe.
inline double to_open_unit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32) | lo;
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

Philox4x32::Key key_from_seed(std::uint64_t seed) {
  const std::uint64_t k = splitmix64(seed);
  return {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
}

Philox4x32::Counter make_counter(std::uint64_t block, std::uint64_t replica) {
  return {static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
          static_cast<std::uint32_t>(replica), static_cast<std::uint32_t>(replica >> 32)};
}

}  // namespace

Philox4x32::Counter Philox4x32::apply(Counter ctr, Key key) noexcept {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kPhiloxW0;
      key[1] += kPhiloxW1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
    mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::string_view algorithm_id(NoiseAlgorithm algorithm) noexcept {
  switch (algorithm) {
    case NoiseAlgorithm::philox4x32_10_box_muller: return "philox4x32-10/box-muller";
    case NoiseAlgorithm::zero: return "zero";
  }
  return "unknown";
}

NoiseStream::NoiseStream(std::uint64_t master_seed, std::uint64_t replica_index,
                         NoiseAlgorithm algorithm)
    : master_seed_(master_seed),
      replica_index_(replica_index),
      algorithm_(algorithm),
      key_(key_from_seed(master_seed)) {}

NoiseStream NoiseStream::for_replica(std::uint64_t replica_index) const {
  return NoiseStream(master_seed_, replica_index, algorithm_);
}

NoiseStream NoiseStream::fork(std::uint64_t salt) const {
  return NoiseStream(splitmix64(master_seed_ ^ splitmix64(salt)), replica_index_, algorithm_);
}

double NoiseStream::normal_at(std::uint64_t index) const noexcept {
  const std::uint64_t block = index >> 1;
  if (block != cached_block_) {
    const auto r = Philox4x32::apply(make_counter(block, replica_index_), key_);
    const double u1 = to_open_unit(r[0], r[1]);
    const double u2 = to_open_unit(r[2], r[3]);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    cached_pair_ = {radius * std::cos(angle), radius * std::sin(angle)};
    cached_block_ = block;
  }
  return cached_pair_[index & 1];
}

void NoiseStream::normal_vector_at(std::uint64_t counter, std::span<double> out) const noexcept {
  if (algorithm_ == NoiseAlgorithm::zero) {
    for (double& v : out) v = 0.0;
    return;
  }
  const std::uint64_t base = counter * out.size();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = normal_at(base + i);
}

void NoiseStream::uniform_vector_at(std::uint64_t counter, std::span<double> out) const noexcept {
  // Zero-noise streams still need genuine uniforms for probe sampling.
  const Philox4x32::Key key = key_from_seed(master_seed_ ^ kUniformDomain);
  const std::uint64_t base = counter * out.size();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::uint64_t j = base + i;
    const auto r = Philox4x32::apply(make_counter(j >> 1, replica_index_), key);
    out[i] = (j & 1) ? to_open_unit(r[2], r[3]) : to_open_unit(r[0], r[1]);
  }
}

}  // namespace emfluct
