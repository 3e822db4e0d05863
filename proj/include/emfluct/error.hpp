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
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace emfluct {

// Machine-readable error categories. The CLI maps these onto exit codes.
enum class ErrorCategory {
  contract_violation,
  non_finite_drift,
  non_finite_observable,
  divergence,
  configuration,
  capability,
  mismatched_bundle,
  degenerate_normalizer,
  experiment,
};

const char* to_string(ErrorCategory category) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

class ContractViolation : public Error {
 public:
  explicit ContractViolation(const std::string& message)
      : Error(ErrorCategory::contract_violation, message) {}
};

class NonFiniteDrift : public Error {
 public:
  NonFiniteDrift(std::vector<double> state, std::int64_t step);

  const std::vector<double>& state() const noexcept { return state_; }
  // -1 when the failure did not happen inside a chain.
  std::int64_t step() const noexcept { return step_; }

 private:
  std::vector<double> state_;
  std::int64_t step_;
};

class NonFiniteObservable : public Error {
 public:
  explicit NonFiniteObservable(std::size_t step);
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

class Divergence : public Error {
 public:
  Divergence(std::int64_t step, double norm, double bound);
  std::int64_t step() const noexcept { return step_; }
  double norm() const noexcept { return norm_; }

 private:
  std::int64_t step_;
  double norm_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message)
      : Error(ErrorCategory::configuration, message) {}
};

class CapabilityError : public Error {
 public:
  explicit CapabilityError(const std::string& message)
      : Error(ErrorCategory::capability, message) {}
};

class MismatchedBundle : public Error {
 public:
  MismatchedBundle(double max_residual, double tolerance);
  double max_residual() const noexcept { return max_residual_; }

 private:
  double max_residual_;
};

class DegenerateNormalizer : public Error {
 public:
  DegenerateNormalizer()
      : Error(ErrorCategory::degenerate_normalizer,
              "self-normalizer is zero: grad phi vanishes along the path") {}
};

class ExperimentError : public Error {
 public:
  explicit ExperimentError(const std::string& message)
      : Error(ErrorCategory::experiment, message) {}
};

// Throws ContractViolation with `what` unless `condition` holds.
inline void require(bool condition, const char* what) {
  if (!condition) throw ContractViolation(what);
}

}  // namespace emfluct
