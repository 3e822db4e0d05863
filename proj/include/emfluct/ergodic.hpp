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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "emfluct/executor.hpp"
#include "emfluct/linalg.hpp"
#include "emfluct/rng.hpp"
#include "emfluct/sde_core.hpp"

namespace emfluct {

// A test function h: R^d -> R.
struct Observable {
  std::string name;
  std::function<double(std::span<const double>)> eval;
  // Whether h is bounded with bounded derivatives up to order two.
  std::string smoothness_note;

  double operator()(std::span<const double> x) const { return eval(x); }
};

Observable identity_observable();  // x_1 (first coordinate)
Observable square_observable();    // |x|^2
Observable tanh_observable();      // tanh(x_1)
Observable constant_observable(double value);

// (1/m) sum_{k=0}^{m-1} h(theta_k); theta_m is excluded.
double pi_eta_average(const Trajectory& trajectory, const Observable& h);

struct StationaryOptions {
  std::size_t burn_in = 0;
  Vector start;  // zeros when empty
  double blowup_bound = kDefaultBlowupBound;
};

// State after `burn_in` EM steps from `start`: an approximate pi_eta draw
// whose bias decays geometrically in the burn-in length.
Vector sample_stationary(const SdeModel& model, double eta, const StationaryOptions& options,
                         NoiseStream stream);

// AR(1) chain theta' = (1 - a eta) theta + sqrt(eta) sigma xi.
struct OuClosedForm {
  double a;
  double sigma;
  double eta;
};

struct OuMoments {
  double mean;
  double variance;     // of pi_eta: sigma^2 / (2a - a^2 eta)
  double ct_variance;  // of pi: sigma^2 / (2a)
};

OuMoments ou_exact_moments(const OuClosedForm& cf);

struct DriftPoint {
  Vector point;
  double expected_v = 0.0;  // E V(theta') with V(x) = |x|^2 + 1
  double bound = 0.0;       // rho V(theta) + b 1_D(theta)
  double slack = 0.0;       // bound - expected_v
  bool in_d = false;
};

struct DriftReport {
  double rho = 0.0;
  double b = 0.0;
  double d_radius = 0.0;    // D = {|x| <= 2b / (eta K1)}
  bool contractive = false; // rho < 1
  std::size_t violations = 0;
  std::vector<DriftPoint> points;
};

// Exact one-step conditional expectation of V against the Lyapunov bound
// built from the declared L, K1, K2. Throws ConfigError if any is missing.
DriftReport lyapunov_drift_check(const SdeModel& model, double eta,
                                 std::span<const Vector> points);

struct BiasRow {
  double eta = 0.0;
  double estimate = 0.0;  // mean of f over the draws
  double std_err = 0.0;
  double oracle = 0.0;
  double bias_hat = 0.0;  // |estimate - oracle|
  double ratio_to_sqrt_eta = 0.0;
  bool inconclusive = false;  // std_err > bias_hat / 2
};

struct BiasCurve {
  std::vector<BiasRow> rows;
  double oracle = 0.0;
  std::optional<double> oracle_std_err;  // set when estimated by a reference run
  std::size_t diverged = 0;
};

struct BiasOptions {
  double c_burn = 20.0;
  Vector start;
  double blowup_bound = kDefaultBlowupBound;
};

// Draw i at every eta uses replica stream i, so rows share random numbers.
BiasCurve invariant_bias_curve(const SdeModel& model, const Observable& f,
                               std::span<const double> eta_list, std::size_t draws,
                               std::optional<double> oracle_pi_f, const NoiseStream& stream,
                               const BiasOptions& options = {},
                               const Executor& executor = serial_executor());

}  // namespace emfluct
