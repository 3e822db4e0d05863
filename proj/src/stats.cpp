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

#include "emfluct/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "emfluct/error.hpp"

namespace emfluct::stats {

Moments moments(std::span<const double> samples) {
  Moments m;
  m.n = samples.size();
  if (m.n == 0) return m;
  double sum = 0.0;
  for (double v : samples) sum += v;
  m.mean = sum / static_cast<double>(m.n);
  if (m.n < 2) return m;
  double ss = 0.0;
  for (double v : samples) ss += (v - m.mean) * (v - m.mean);
  m.variance = ss / static_cast<double>(m.n - 1);
  m.std_err = std::sqrt(m.variance / static_cast<double>(m.n));
  return m;
}

LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size(), "least_squares: size mismatch");
  require(x.size() >= 2, "least_squares: need at least two points");
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  require(sxx > 0.0, "least_squares: abscissae are constant");
  LinearFit fit;
  fit.n = x.size();
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

Interval wilson_interval(std::size_t successes, std::size_t trials, double z) {
  require(trials > 0, "wilson_interval: no trials");
  require(successes <= trials, "wilson_interval: successes exceed trials");
  const auto n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

double quantile_sorted(std::span<const double> sorted, double p) {
  require(!sorted.empty(), "quantile: empty sample");
  require(p >= 0.0 && p <= 1.0, "quantile: p outside [0,1]");
  const double h = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::vector<double> quantile_grid(std::span<const double> samples, std::span<const double> probs) {
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> grid;
  grid.reserve(probs.size());
  for (double p : probs) grid.push_back(quantile_sorted(sorted, p));
  return grid;
}

std::vector<SurvivalRow> survival_table(std::span<const double> samples,
                                        std::span<const double> x_grid, Tail tail,
                                        std::size_t min_exceed) {
  require(!samples.empty(), "survival_table: empty sample");
  for (std::size_t i = 1; i < x_grid.size(); ++i)
    require(x_grid[i] >= x_grid[i - 1], "survival_table: grid must be non-decreasing");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<SurvivalRow> rows;
  rows.reserve(x_grid.size());
  for (double x : x_grid) {
    const auto it = tail == Tail::strictly_greater
                        ? std::upper_bound(sorted.begin(), sorted.end(), x)
                        : std::lower_bound(sorted.begin(), sorted.end(), x);
    SurvivalRow row;
    row.x = x;
    row.n_exceed = static_cast<std::size_t>(sorted.end() - it);
    row.survival = static_cast<double>(row.n_exceed) / static_cast<double>(sorted.size());
    row.ci = wilson_interval(row.n_exceed, sorted.size());
    row.trusted = row.n_exceed >= min_exceed;
    rows.push_back(row);
  }
  return rows;
}

LinearFit fit_log_survival(std::span<const SurvivalRow> rows,
                           const std::function<double(double)>& abscissa, double from_x) {
  std::vector<double> xs, ys;
  for (const auto& row : rows) {
    if (row.x < from_x || !row.trusted || row.survival <= 0.0) continue;
    xs.push_back(abscissa(row.x));
    ys.push_back(std::log(row.survival));
  }
  if (xs.size() < 2) return {};
  return least_squares(xs, ys);
}

double ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf) {
  require(!samples.empty(), "ks_statistic: empty sample");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    d = std::max(d, std::max(static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n));
  }
  return d;
}

double normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

}  // namespace emfluct::stats
