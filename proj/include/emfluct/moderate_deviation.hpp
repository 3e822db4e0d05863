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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "emfluct/decomposition.hpp"
#include "emfluct/ergodic.hpp"
#include "emfluct/executor.hpp"
#include "emfluct/rng.hpp"
#include "emfluct/sde_core.hpp"
#include "emfluct/stats.hpp"
#include "emfluct/stein.hpp"

namespace emfluct {

// (1/m) sum_{k<m} |sigma^T grad phi(theta_k)|^2
double self_normalizer(const Trajectory& trajectory, const SteinBundle& bundle,
                       const SdeModel& model);

// eta^{-1/2} (pi_eta_h - pi_h) / sqrt(y_eta). Throws DegenerateNormalizer
// when y_eta == 0.
double self_normalized_stat(double pi_eta_h, double pi_h, double y_eta, double eta);

// 1 - Phi(x) via erfc: full relative precision in the upper tail.
double normal_sf(double x) noexcept;

struct ReplicaRecord {
  double pi_eta_h = 0.0;
  double y_eta = 0.0;    // >= 0
  double w_eta = 0.0;    // NaN iff y_eta == 0
  SeedProvenance seed;
  bool diverged = false;  // always false for stored records
};

struct EnsembleResult {
  std::vector<ReplicaRecord> records;  // replica-index order, divergent ones removed
  std::vector<std::uint64_t> diverged_replicas;
  double eta = 0.0;
  std::size_t m = 0;
  std::size_t burn_in = 0;
  double pi_h = 0.0;
  std::string model_id;
  std::string observable_id;
  std::uint64_t master_seed = 0;
  std::size_t requested = 0;
};

struct EnsembleOptions {
  // Burn-in steps; default_burn_in(eta, c_burn) when unset.
  std::optional<std::size_t> burn_in;
  double c_burn = 20.0;
  Vector start;  // zeros when empty
  double blowup_bound = kDefaultBlowupBound;
  // Fraction of divergent replicas tolerated before ExperimentError.
  double divergence_budget = 0.01;
};

// Replica r: burn-in from `start`, then m = floor(eta^-2) recorded states,
// all on stream.for_replica(r).
EnsembleResult run_ensemble(const SdeModel& model, const Observable& h, double pi_h,
                            const SteinBundle& bundle, double eta, std::size_t n_replicas,
                            const NoiseStream& stream, const EnsembleOptions& options = {},
                            const Executor& executor = serial_executor());

// eta^{-1/2} (Pi_eta(h) - pi_h) per record.
std::vector<double> scaled_fluctuations(const EnsembleResult& ensemble);

struct CltCheck {
  double ks_stat = 0.0;
  double variance_ratio = 0.0;
  double sample_mean = 0.0;
  double sample_variance = 0.0;
  std::size_t n = 0;
};

// Needs at least `min_records` records (500 by default).
CltCheck clt_check(const EnsembleResult& ensemble, double target_variance,
                   std::size_t min_records = 500);
// The same statistics on raw samples.
CltCheck clt_check_samples(std::span<const double> samples, double target_variance);

struct TailRatioCurve {
  std::vector<double> x_grid;
  std::vector<double> ratio;  // P(W >= x) / (1 - Phi(x))
  std::vector<double> ci_low;
  std::vector<double> ci_high;
  std::vector<std::size_t> n_exceed;
  std::vector<bool> trusted;  // n_exceed >= min_exceed
  std::vector<double> sf;     // 1 - Phi(x)
  std::size_t n = 0;
};

TailRatioCurve tail_ratio_curve(const EnsembleResult& ensemble, std::span<const double> x_grid,
                                std::size_t min_exceed = 10);
TailRatioCurve tail_ratio_curve_samples(std::span<const double> w, std::span<const double> x_grid,
                                        std::size_t min_exceed = 10);

struct StationarySumOptions {
  TailProbeOptions tail;
  // Length of the single calibration chain that estimates the per-step mean.
  std::size_t calibration_steps = 2'000'000;
  // Known per-step mean; skips the calibration run.
  std::optional<double> mu;
};

struct StationarySumTable {
  TailTable table;  // survival of |S_k - k mu_hat|; fit abscissa is y^2 / k
  double mu_hat = 0.0;
  std::size_t k = 0;
};

// S_k = sum_{i<k} |sigma^T grad phi(theta_i)|^2 from approximate stationary
// starts. The calibration chain runs on a fork of `stream`.
StationarySumTable stationary_sum_concentration(const SdeModel& model, const SteinBundle& bundle,
                                                double eta, std::size_t k, std::size_t replicas,
                                                std::span<const double> y_grid,
                                                const NoiseStream& stream,
                                                const StationarySumOptions& options = {},
                                                const Executor& executor = serial_executor());

}  // namespace emfluct
