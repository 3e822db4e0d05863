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
#include <optional>
#include <span>
#include <vector>

#include "emfluct/ergodic.hpp"
#include "emfluct/executor.hpp"
#include "emfluct/rng.hpp"
#include "emfluct/sde_core.hpp"
#include "emfluct/stats.hpp"
#include "emfluct/stein.hpp"

namespace emfluct {

// Nodes and weights of n-point Gauss-Legendre quadrature on [0, 1]; exact
// for polynomials of degree <= 2n - 1.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
QuadratureRule gauss_legendre_unit(int order);

// Weight inside (1/6) int_0^1 w(t) grad^3 phi(theta + t dtheta)[...] dt.
//   integral_remainder: w(t) = 3 (1 - t)^2, the exact Taylor remainder.
//   as_displayed:       w(t) = 1, the mean-value form; equal to the above
//                       only when grad^3 phi is constant along the chord.
enum class TaylorKernel { integral_remainder, as_displayed };

struct RemainderTerms {
  std::array<double, 6> r{};  // R_1 .. R_6
  // The two summands of R_5: the Hessian term and the third-derivative term.
  double r5_hessian = 0.0;
  double r5_third = 0.0;
};

struct DecompositionReport {
  double lhs = 0.0;     // eta^{-1/2} (Pi_eta(h) - pi_h)
  double h_part = 0.0;  // martingale part H
  std::array<double, 6> r_parts{};
  double r5_third = 0.0;
  double remainder = 0.0;  // R = -(R_1 + ... + R_6)
  double residual = 0.0;   // lhs - h_part - remainder
  int quad_order = 0;
  std::size_t m = 0;
  double eta = 0.0;
};

struct DecompositionOptions {
  int quad_order = 5;
  TaylorKernel kernel = TaylorKernel::integral_remainder;
  // Maximum |A phi - (h - pi_h)| / (1 + |h|) on visited states; nullopt
  // disables the check.
  std::optional<double> stein_tolerance = 1e-8;
  std::size_t precheck_points = 64;
};

// Scale factor 1 / (m eta^{3/2}); equals sqrt(eta) when m = eta^{-2}, and
// keeps the identity exact for any m.
double decomposition_scale(double eta, std::size_t m);

// -kappa sqrt(eta) sum_k <grad phi(theta_k), sigma xi_{k+1}>, kappa as above.
double martingale_part(const Trajectory& trajectory, const SteinBundle& bundle,
                       const SdeModel& model);

RemainderTerms remainder_terms(const Trajectory& trajectory, const SteinBundle& bundle,
                               const SdeModel& model, int quad_order,
                               TaylorKernel kernel = TaylorKernel::integral_remainder);

DecompositionReport decomposition_residual(const Trajectory& trajectory, const Observable& h,
                                           double pi_h, const SteinBundle& bundle,
                                           const SdeModel& model,
                                           const DecompositionOptions& options = {});

// Probability levels for quantile-derived grids, 0.5 .. 0.999 evenly spaced
// in log(1 - p).
std::vector<double> default_tail_levels(std::size_t count = 21);

struct TailProbeOptions {
  double c_burn = 20.0;
  Vector start;
  std::size_t min_exceed = 10;
  std::vector<double> levels;  // default_tail_levels() when empty
};

struct TailTable {
  std::vector<stats::SurvivalRow> rows;
  stats::LinearFit fit;  // log survival vs abscissa on the fitted range
  double fit_from = 0.0;
  stats::Moments sample;
  std::size_t diverged = 0;
};

// S = eta sum_{k<m} |g(theta_k)|^2 from approximate stationary starts. The
// grid defaults to sample quantiles; the fit uses the upper quartile of it.
TailTable concentration_g_probe(const SdeModel& model, double eta, std::size_t m,
                                std::size_t replicas, std::span<const double> x_grid,
                                const NoiseStream& stream, const TailProbeOptions& options = {},
                                const Executor& executor = serial_executor());

struct RemainderTail {
  double eta = 0.0;
  std::size_t m = 0;
  std::vector<stats::SurvivalRow> rows;  // survival of |R|
  double median_abs = 0.0;
  double q99_abs = 0.0;  // x with empirical survival 1e-2
  stats::SurvivalRow at_x0;
  std::size_t diverged = 0;
};

struct RemainderProbeOptions {
  TailProbeOptions tail;
  int quad_order = 5;
  double x0 = 0.5;
};

// Ensemble survival of |R| for each eta. Needs a bundle with third derivatives.
std::vector<RemainderTail> remainder_tail_probe(const SdeModel& model, const Observable& h,
                                                double pi_h, const SteinBundle& bundle,
                                                std::span<const double> eta_list,
                                                std::size_t replicas, const NoiseStream& stream,
                                                const RemainderProbeOptions& options = {},
                                                const Executor& executor = serial_executor());

}  // namespace emfluct
