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
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "emfluct/ergodic.hpp"
#include "emfluct/executor.hpp"
#include "emfluct/linalg.hpp"
#include "emfluct/rng.hpp"
#include "emfluct/sde_core.hpp"

namespace emfluct {

using ScalarField = std::function<double(std::span<const double>)>;
// Writes d (gradient), d*d (Hessian) or d*d*d (third derivative) entries,
// row-major.
using TensorField = std::function<void(std::span<const double>, std::span<double>)>;

enum class Provenance { analytic, monte_carlo_fd };

const char* to_string(Provenance provenance) noexcept;

// A solution phi of A phi = h - pi(h) together with its derivatives.
struct SteinBundle {
  std::size_t dim = 1;
  ScalarField phi;
  TensorField grad;
  TensorField hess;
  TensorField third;  // may be empty
  Provenance provenance = Provenance::analytic;
  // Numeric Hessian / third derivative come from nested finite differences.
  bool low_trust_higher_order = false;
  // sup-norm estimates of the derivatives of order 0..3, when known.
  std::optional<std::array<double, 4>> derivative_bounds;
  std::string description;

  bool has_third() const noexcept { return static_cast<bool>(third); }
  Vector grad_at(std::span<const double> x) const;
  Vector hess_at(std::span<const double> x) const;
  Vector third_at(std::span<const double> x) const;
};

// <g(x), grad phi(x)> + (1/2) <sigma sigma^T, hess phi(x)>_HS
double generator_apply(const SdeModel& model, const SteinBundle& bundle,
                       std::span<const double> x);

SteinBundle zero_bundle(std::size_t dim);

enum class OuObservableKind { linear, quadratic, tanh_numeric };

struct PhiEstimate {
  double value = 0.0;
  double std_err = 0.0;
  double t_max = 0.0;
  double dt = 0.0;
  std::size_t replicas = 0;
  // |mean of h(X_tmax) - pi_h| / K1: size of the neglected integral tail.
  double tail_estimate = 0.0;
  bool truncation_warning = false;
  SeedProvenance seed;
};

struct PhiEstimateOptions {
  double t_max = 15.0;
  double dt = 0.005;
  std::size_t replicas = 10000;
  double tail_tolerance = 1e-3;
};

// t_max = 15 / K1 with the declared dissipativity rate (15 if undeclared).
double default_t_max(const SdeModel& model);

// -int_0^tmax E[h(X_t(x)) - pi_h] dt with X the EM chain at step dt and the
// integral by the trapezoid rule. Replica r uses stream.for_replica(r), so
// calls sharing a stream use common random numbers.
PhiEstimate estimate_phi(const SdeModel& model, const Observable& h, double pi_h,
                         std::span<const double> x, const PhiEstimateOptions& options,
                         const NoiseStream& stream, const Executor& executor = serial_executor());

// eps^(1/3) (1 + |x_i|) for analytic evaluators, 0.05 for Monte Carlo ones.
double default_fd_step(Provenance provenance, double coordinate) noexcept;

// Central differences (phi(x + s e_i) - phi(x - s e_i)) / 2s.
Vector grad_phi_fd(const ScalarField& phi_eval, std::span<const double> x, double step);

// Bundle whose derivatives are nested central differences of phi_eval.
// The third derivative is only attached when max_order >= 3.
SteinBundle numeric_bundle(ScalarField phi_eval, std::size_t dim, double step,
                           int max_order = 2);

struct NumericPhiSettings {
  NoiseStream stream;
  PhiEstimateOptions options;
  double fd_step = 0.05;
};

// Analytic Stein solutions of the d-dimensional OU process g(x) = -a x,
// sigma I: linear h = x_1 gives phi = -x_1/a; quadratic h = |x|^2 gives
// phi = -(|x|^2 - d sigma^2/(2a)) / (2a). tanh_numeric (h = tanh x_1)
// estimates phi by Monte Carlo and needs `numeric`.
SteinBundle stein_solution_ou(double a, double sigma, OuObservableKind kind, std::size_t dim = 1,
                              std::optional<NumericPhiSettings> numeric = std::nullopt);

// pi(h) for the OU observables above.
double ou_pi(double a, double sigma, OuObservableKind kind, std::size_t dim = 1);

struct ResidualPoint {
  Vector point;
  double residual = 0.0;  // |A phi(x) - (h(x) - pi_h)|
};

struct SteinResidualReport {
  double max_residual = 0.0;
  std::vector<ResidualPoint> points;
};

SteinResidualReport stein_residual(const SdeModel& model, const SteinBundle& bundle,
                                   const Observable& h, double pi_h,
                                   std::span<const Vector> grid);

}  // namespace emfluct
