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

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "emfluct/error.hpp"
#include "emfluct/stats.hpp"

namespace emfluct::stats {
namespace {

TEST(Stats, Moments) {
  const std::vector<double> x{1, 2, 3, 4};
  const auto m = moments(x);
  EXPECT_EQ(m.n, 4u);
  EXPECT_DOUBLE_EQ(m.mean, 2.5);
  EXPECT_DOUBLE_EQ(m.variance, 5.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.std_err, std::sqrt(5.0 / 12.0));
}

TEST(Stats, LeastSquaresExactLine) {
  const std::vector<double> x{0, 1, 2, 3}, y{1, 3, 5, 7};
  const auto f = least_squares(x, y);
  EXPECT_DOUBLE_EQ(f.slope, 2.0);
  EXPECT_DOUBLE_EQ(f.intercept, 1.0);
  EXPECT_DOUBLE_EQ(f.r_squared, 1.0);
  const std::vector<double> flat{4, 4, 4, 4};
  EXPECT_DOUBLE_EQ(least_squares(x, flat).r_squared, 1.0);
  EXPECT_THROW(least_squares(flat, y), ContractViolation);
}

// Reference values from the closed-form Wilson score interval.
TEST(Stats, WilsonInterval) {
  const auto half = wilson_interval(5, 10);
  EXPECT_NEAR(half.low, 0.236593090, 1e-8);
  EXPECT_NEAR(half.high, 0.763406910, 1e-8);
  const auto none = wilson_interval(0, 10);
  EXPECT_EQ(none.low, 0.0);
  EXPECT_NEAR(none.high, 0.277532799, 1e-8);
  const auto all = wilson_interval(10, 10);
  EXPECT_NEAR(all.low, 1.0 - none.high, 1e-12);
  EXPECT_DOUBLE_EQ(all.high, 1.0);
}

TEST(Stats, QuantileType7) {
  const std::vector<double> x{1, 2, 3, 4};
  EXPECT_DOUBLE_EQ(quantile_sorted(x, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(quantile_sorted(x, 0.25), 1.75);
  EXPECT_DOUBLE_EQ(quantile_sorted(x, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(quantile_sorted(x, 1.0), 4.0);
  const std::vector<double> shuffled{4, 1, 3, 2}, p{0.25, 0.5};
  const auto q = quantile_grid(shuffled, p);
  EXPECT_DOUBLE_EQ(q[0], 1.75);
  EXPECT_DOUBLE_EQ(q[1], 2.5);
}

TEST(Stats, SurvivalTable) {
  const std::vector<double> x{1, 2, 3, 4, 5}, grid{2.5, 3.0};
  const auto gt = survival_table(x, grid, Tail::strictly_greater, 3);
  EXPECT_EQ(gt[0].n_exceed, 3u);
  EXPECT_DOUBLE_EQ(gt[0].survival, 0.6);
  EXPECT_TRUE(gt[0].trusted);
  EXPECT_EQ(gt[1].n_exceed, 2u);
  EXPECT_FALSE(gt[1].trusted);
  const auto ge = survival_table(x, grid, Tail::greater_or_equal, 3);
  EXPECT_EQ(ge[1].n_exceed, 3u);
  for (const auto& r : gt) {
    EXPECT_LE(r.ci.low, r.survival);
    EXPECT_GE(r.ci.high, r.survival);
  }
}

TEST(Stats, FitLogSurvivalOnExponentialTail) {
  std::vector<SurvivalRow> rows;
  for (int i = 0; i < 6; ++i) {
    SurvivalRow r;
    r.x = i;
    r.survival = std::exp(-2.0 * i);
    r.trusted = true;
    rows.push_back(r);
  }
  rows.back().trusted = false;
  const auto fit = fit_log_survival(rows, [](double x) { return x; }, 1.0);
  EXPECT_EQ(fit.n, 4u);
  EXPECT_NEAR(fit.slope, -2.0, 1e-12);
  EXPECT_NEAR(fit.r_squared, 1.0, 1e-12);
}

TEST(Stats, KsStatistic) {
  const std::vector<double> one{0.0};
  EXPECT_DOUBLE_EQ(ks_statistic(one, normal_cdf), 0.5);
  EXPECT_DOUBLE_EQ(normal_cdf(0.0), 0.5);
  EXPECT_NEAR(normal_cdf(1.959963984540054), 0.975, 1e-15);
}

}  // namespace
}  // namespace emfluct::stats
