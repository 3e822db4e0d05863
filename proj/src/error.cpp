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

#include "emfluct/error.hpp"

#include <sstream>
#include <utility>

namespace emfluct {

const char* to_string(ErrorCategory category) noexcept {
  switch (category) {
    case ErrorCategory::contract_violation: return "contract_violation";
    case ErrorCategory::non_finite_drift: return "non_finite_drift";
    case ErrorCategory::non_finite_observable: return "non_finite_observable";
    case ErrorCategory::divergence: return "divergence";
    case ErrorCategory::configuration: return "configuration";
    case ErrorCategory::capability: return "capability";
    case ErrorCategory::mismatched_bundle: return "mismatched_bundle";
    case ErrorCategory::degenerate_normalizer: return "degenerate_normalizer";
    case ErrorCategory::experiment: return "experiment";
  }
  return "unknown";
}

namespace {

std::string describe_state(const std::vector<double>& state, std::int64_t step) {
  std::ostringstream os;
  os << "non-finite drift at step " << step << ", state (";
  for (std::size_t i = 0; i < state.size(); ++i) {
    if (i) os << ", ";
    os << state[i];
  }
  os << ")";
  return os.str();
}

}  // namespace

NonFiniteDrift::NonFiniteDrift(std::vector<double> state, std::int64_t step)
    : Error(ErrorCategory::non_finite_drift, describe_state(state, step)),
      state_(std::move(state)),
      step_(step) {}

NonFiniteObservable::NonFiniteObservable(std::size_t step)
    : Error(ErrorCategory::non_finite_observable,
            "non-finite observable value at step " + std::to_string(step)),
      step_(step) {}

Divergence::Divergence(std::int64_t step, double norm, double bound)
    : Error(ErrorCategory::divergence,
            "chain diverged at step " + std::to_string(step) + ": |theta| = " +
                std::to_string(norm) + " exceeds " + std::to_string(bound)),
      step_(step),
      norm_(norm) {}

MismatchedBundle::MismatchedBundle(double max_residual, double tolerance)
    : Error(ErrorCategory::mismatched_bundle,
            "Stein residual " + std::to_string(max_residual) +
                " exceeds tolerance " + std::to_string(tolerance) +
                "; bundle does not solve A phi = h - pi(h)"),
      max_residual_(max_residual) {}

}  // namespace emfluct
