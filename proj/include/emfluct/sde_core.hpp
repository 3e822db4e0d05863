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
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "emfluct/executor.hpp"
#include "emfluct/linalg.hpp"
#include "emfluct/rng.hpp"

namespace emfluct {

// Writes g(x) into `out`; both spans have length d.
using DriftFn = std::function<void(std::span<const double> x, std::span<double> out)>;

inline constexpr double kDefaultBlowupBound = 1e8;

struct Dissipativity {
  double k1;  // > 0
  double k2;  // >= 0
};

struct SdeModelSpec {
  std::string name;
  std::size_t dim = 1;
  DriftFn drift;
  Matrix sigma;
  std::optional<double> lipschitz;
  std::optional<Dissipativity> dissipativity;
  std::optional<double> drift_hessian_bound;
};

// dX = g(X) dt + sigma dB with constant invertible sigma.
class SdeModel {
 public:
  // Throws ContractViolation if sigma is singular or the declared constants
  // are out of range.
  explicit SdeModel(SdeModelSpec spec);

  const std::string& name() const noexcept { return spec_.name; }
  std::size_t dim() const noexcept { return spec_.dim; }
  const Matrix& sigma() const noexcept { return spec_.sigma; }
  const Matrix& sigma_sigma_t() const noexcept { return sigma_sigma_t_; }
  bool sigma_is_diagonal() const noexcept { return sigma_diagonal_; }
  std::optional<double> lipschitz() const noexcept { return spec_.lipschitz; }
  std::optional<Dissipativity> dissipativity() const noexcept { return spec_.dissipativity; }
  std::optional<double> drift_hessian_bound() const noexcept { return spec_.drift_hessian_bound; }

  void drift(std::span<const double> x, std::span<double> out) const { spec_.drift(x, out); }
  Vector drift_at(std::span<const double> x) const;
  // out = sigma * xi
  void apply_sigma(std::span<const double> xi, std::span<double> out) const noexcept;

 private:
  SdeModelSpec spec_;
  Matrix sigma_sigma_t_;
  bool sigma_diagonal_ = false;
};

// g(x) = -a x, sigma = s I.
SdeModel make_ou(double a, double sigma, std::size_t dim = 1);
// One-dimensional g(x) = x - x^3. Declared L = 11 is the Lipschitz constant
// on [-2, 2] only; K1 = 1/2, K2 = 9/4 hold on the whole line.
SdeModel make_double_well(double sigma = 1.0);
// g(x) = c x with no declared constants; c > 0 is anti-dissipative.
SdeModel make_linear_drift(double c, double sigma, std::size_t dim = 1);
SdeModel make_zero_drift(double sigma, std::size_t dim = 1);

// floor(eta^-2), tolerant of the rounding in 1/eta^2 for exact reciprocals.
std::size_t default_chain_length(double eta);
// ceil(c_burn / eta * log(1/eta)).
std::size_t default_burn_in(double eta, double c_burn = 20.0);

struct EmConfig {
  double eta = 0.1;
  std::size_t m = 0;
  std::size_t burn_in = 0;
  Vector initial_state;
  double blowup_bound = kDefaultBlowupBound;

  // m = floor(eta^-2).
  static EmConfig standard(double eta, Vector initial_state, std::size_t burn_in = 0);
  void validate(std::size_t dim) const;
};

// theta + eta g(theta) + sqrt(eta) sigma xi, associated as
// (theta + eta*g) + sqrt(eta)*(sigma xi).
Vector em_step(const SdeModel& model, std::span<const double> state, double eta,
               std::span<const double> noise);

// Allocation-free EM walker over a noise stream. Step indices in errors count
// every step taken by this walker, starting at 1.
class EmChain {
 public:
  EmChain(const SdeModel& model, double eta, std::span<const double> start, NoiseStream stream,
          double blowup_bound = kDefaultBlowupBound);

  void advance();
  void advance(std::size_t steps) {
    for (std::size_t i = 0; i < steps; ++i) advance();
  }

  std::span<const double> state() const noexcept { return state_; }
  std::span<const double> last_noise() const noexcept { return noise_; }
  std::size_t steps_taken() const noexcept { return steps_; }
  const NoiseStream& stream() const noexcept { return stream_; }
  double eta() const noexcept { return eta_; }

 private:
  const SdeModel* model_;
  double eta_;
  double sqrt_eta_;
  double blowup_bound_;
  NoiseStream stream_;
  Vector state_, next_, noise_, drift_, scaled_noise_;
  std::size_t steps_ = 0;
};

struct SeedProvenance {
  std::uint64_t master_seed = 0;
  std::uint64_t replica_index = 0;
};

// theta_0..theta_m and the increments xi_1..xi_m that drove them.
struct Trajectory {
  double eta = 0.0;
  std::size_t dim = 0;
  std::vector<double> states;  // (m+1) * dim, row per state
  std::vector<double> noises;  // m * dim; row k is xi_{k+1}
  SeedProvenance seed;

  std::size_t m() const noexcept { return dim ? noises.size() / dim : 0; }
  std::span<const double> state(std::size_t k) const { return {states.data() + k * dim, dim}; }
  // xi_{k+1}: the noise that moved theta_k to theta_{k+1}.
  std::span<const double> noise(std::size_t k) const { return {noises.data() + k * dim, dim}; }
};

// Runs config.burn_in discarded steps, then records m steps.
Trajectory simulate_trajectory(const SdeModel& model, const EmConfig& config, NoiseStream stream);

// True iff every stored step equals em_step of its predecessor bitwise.
bool replays_exactly(const Trajectory& trajectory, const SdeModel& model);

struct ProbeBox {
  Vector lower;
  Vector upper;
};

struct ProbePair {
  Vector x;
  Vector y;
};

struct AssumptionReport {
  std::size_t n_pairs = 0;
  double max_lipschitz_ratio = 0.0;
  // Least squares <g(x)-g(y), x-y> ~ -K1 |x-y|^2 + c; K2_hat is the smallest
  // intercept making the inequality hold on every probe pair with K1_hat.
  double k1_hat = 0.0;
  double k2_hat = 0.0;
  bool dissipative_fit = false;  // k1_hat > 0 and k2_hat <= cap
  std::size_t lipschitz_violations = 0;
  std::size_t dissipativity_violations = 0;
  std::optional<ProbePair> first_violation;
};

struct ProbeOptions {
  double tolerance = 1e-9;
  double k2_cap = 1e6;
};

AssumptionReport probe_assumptions(const SdeModel& model, const ProbeBox& box,
                                   std::size_t n_pairs, NoiseStream stream,
                                   const ProbeOptions& options = {});

struct StrongErrorSpec {
  double T = 1.0;
  std::vector<double> eta_list;
  std::size_t replicas = 1000;
  Vector initial_state;
  // Defaults to min(eta_list)/64.
  std::optional<double> reference_eta;
  double blowup_bound = kDefaultBlowupBound;
};

struct StrongErrorRow {
  double eta;
  std::size_t steps;  // floor(T / eta)
  double mse;
  double std_err;
};

struct StrongErrorTable {
  double eta_ref = 0.0;
  std::vector<StrongErrorRow> rows;
  std::size_t replicas_used = 0;
  std::size_t diverged = 0;
  // Least-squares slope of log mse against log eta over rows with mse > 0.
  std::optional<double> slope;
  // max over rows of mse/eta, and the same max over the two largest eta.
  double max_mse_over_eta = 0.0;
  double bound_constant = 0.0;
};

// Mean-square gap at time floor(T/eta)*eta between EM at each eta and EM at
// eta_ref driven by the same Brownian increments.
StrongErrorTable strong_error_mse(const SdeModel& model, const StrongErrorSpec& spec,
                                  const NoiseStream& stream,
                                  const Executor& executor = serial_executor());

}  // namespace emfluct
