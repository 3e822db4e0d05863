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
#include <span>
#include <vector>

namespace emfluct::stats {

struct Moments {
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased; 0 when n < 2
  double std_err = 0.0;   // sqrt(variance / n)
};

// Two-pass, summing in index order.
Moments moments(std::span<const double> samples);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t n = 0;
};

// Ordinary least squares y ~ slope * x + intercept. Requires n >= 2 and
// non-constant x. R^2 is 1 when y is constant along an exact fit.
LinearFit least_squares(std::span<const double> x, std::span<const double> y);

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

inline constexpr double kZ95 = 1.959963984540054;

// Wilson score interval for k successes in n trials.
Interval wilson_interval(std::size_t successes, std::size_t trials, double z = kZ95);

// Linear-interpolation quantile (Hyndman-Fan type 7) of sorted data.
double quantile_sorted(std::span<const double> sorted, double p);
std::vector<double> quantile_grid(std::span<const double> samples, std::span<const double> probs);

struct SurvivalRow {
  double x = 0.0;
  double survival = 0.0;
  Interval ci;
  std::size_t n_exceed = 0;
  bool trusted = false;  // n_exceed >= min_exceed
};

enum class Tail { strictly_greater, greater_or_equal };

// Empirical P(X > x) (or P(X >= x)) on an increasing grid with Wilson 95%
// intervals.
std::vector<SurvivalRow> survival_table(std::span<const double> samples,
                                        std::span<const double> x_grid,
                                        Tail tail = Tail::strictly_greater,
                                        std::size_t min_exceed = 10);

// Fit of log survival against abscissa(x) over trusted rows with positive
// survival whose x is at or above `from_x`. nullopt-like n = 0 when fewer
// than two points qualify.
LinearFit fit_log_survival(std::span<const SurvivalRow> rows,
                           const std::function<double(double)>& abscissa, double from_x);

// sup_x |F_n(x) - F(x)|.
double ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf);

double normal_cdf(double x) noexcept;

}  // namespace emfluct::stats
