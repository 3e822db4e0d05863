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

#include <optional>
#include <string>

#include "emfluct/ergodic.hpp"
#include "emfluct/sde_core.hpp"
#include "emfluct/stein.hpp"
#include "emfluct/harness/config.hpp"

namespace emfluct::harness {

SdeModel build_model(const ExperimentConfig& config);
Observable build_observable(const ExperimentConfig& config);

// pi(h) under the continuous-time invariant law, when the registry knows it:
// closed forms for OU, density quadrature for the double well.
std::optional<double> stationary_expectation(const ExperimentConfig& config);

// Stein solution for (model, observable). Throws CapabilityError when no
// solution is registered or a required derivative order is unavailable.
// Monte Carlo bundles use a fork of the master seed.
SteinBundle build_bundle(const ExperimentConfig& config, int required_order);

// pi(|sigma^T grad phi|^2), the limiting variance of the scaled fluctuation.
std::optional<double> limiting_variance(const ExperimentConfig& config);

}  // namespace emfluct::harness
