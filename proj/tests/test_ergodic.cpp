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

#include "emfluct/ergodic.hpp"
#include "emfluct/error.hpp"
#include "emfluct/stats.hpp"

namespace emfluct {
namespace {

Trajectory hand_trajectory(const std::vector<double>& states) {
  Trajectory t;
  t.eta = 0.1;
  t.dim = 1;
  t.states = states;
  t.noises.assign(states.size() - 1, 0.0);
  return t;
}

TEST(PiEtaAverage, HandExamples) {
  const auto t = hand_trajectory({1, 2, 3, 4});
  EXPECT_DOUBLE_EQ(pi_eta_average(t, constant_observable(7.5)), 7.5);
  EXPECT_DOUBLE_EQ(pi_eta_average(t, identity_observable()), 2.0);
  const Observable indicator{"nonneg", [](std::span<const double> x) { return x[0] >= 0 ? 1.0 : 0.0; },
                             "discontinuous"};
  EXPECT_DOUBLE_EQ(pi_eta_average(hand_trajectory({-1, 1, -1, 1}), indicator), 1.0 / 3.0);
}

TEST(PiEtaAverage, LinearInObservable) {
  const SdeModel model = make_ou(1.0, 1.0, 1);
  const Trajectory t =
      simulate_trajectory(model, EmConfig::standard(0.1, Vector{0.5}, 10), NoiseStream(1));
  const Observable h1 = square_observable(), h2 = tanh_observable();
  const Observable mix{"mix", [&](std::span<const double> x) { return 2.0 * h1(x) - 3.0 * h2(x); }, ""};
  EXPECT_NEAR(pi_eta_average(t, mix), 2.0 * pi_eta_average(t, h1) - 3.0 * pi_eta_average(t, h2),
              1e-13);
}

TEST(PiEtaAverage, NonFiniteObservable) {
  const Observable bad{"log", [](std::span<const double> x) { return std::log(x[0]); }, ""};
  try {
    pi_eta_average(hand_trajectory({1, 2, -1, 4}), bad);
    FAIL();
  } catch (const NonFiniteObservable& e) {
    EXPECT_EQ(e.step(), 2u);
  }
}

TEST(SampleStationary, ZeroNoiseDecay) {
  const SdeModel model = make_ou(1.0, 1.0, 1);
  const Vector x = sample_stationary(model, 0.1, {200, {4.0}}, NoiseStream::zeros());
  EXPECT_LT(std::abs(x[0]), 4.0 * std::pow(0.9, 200.0) * (1 + 1e-12));
  EXPECT_LT(std::abs(x[0]), 1e-8);
}

TEST(SampleStationary, OuVarianceMatchesAr1) {
  const SdeModel model = make_ou(1.0, 1.0, 1);
  const double eta = 0.1;
  const std::size_t n = 100000;
  const NoiseStream base(2718);
  std::vector<double> x(n);
  StationaryOptions opt;
  opt.burn_in = default_burn_in(eta);
  for (std::size_t i = 0; i < n; ++i) x[i] = sample_stationary(model, eta, opt, base.for_replica(i))[0];
  const auto m = stats::moments(x);
  const double v = 1.0 / 1.9;
  EXPECT_LT(std::abs(m.variance - v), 4.0 * v * std::sqrt(2.0 / double(n)));
  EXPECT_LT(std::abs(m.mean), 4.0 * m.std_err);
}

TEST(SampleStationary, NullRecurrentChainTripsGuard) {
  const SdeModel model = make_zero_drift(1.0, 1);
  StationaryOptions opt{100000, {0.0}, 50.0};
  EXPECT_THROW(sample_stationary(model, 0.5, opt, NoiseStream(1)), Divergence);
}

TEST(OuExactMoments, ClosedForms) {
  const auto m = ou_exact_moments({1.0, 1.0, 0.1});
  EXPECT_EQ(m.mean, 0.0);
  EXPECT_NEAR(m.variance, 1.0 / 1.9, 1e-15);
  EXPECT_EQ(m.ct_variance, 0.5);
  EXPECT_NEAR(ou_exact_moments({1.0, 1.0, 1e-9}).variance, 0.5, 1e-9);
  EXPECT_NEAR(ou_exact_moments({2.0, 3.0, 0.2}).variance, 9.0 / (4.0 - 0.8), 1e-14);
  EXPECT_THROW(ou_exact_moments({1.0, 1.0, 1.0}), ContractViolation);
}

TEST(LyapunovDrift, OuHandExample) {
  const SdeModel model = make_ou(1.0, 1.0, 1);
  const std::vector<Vector> pts{{2.0}, {0.0}};
  const auto r = lyapunov_drift_check(model, 0.01, pts);
  EXPECT_NEAR(r.points[0].expected_v, 1.98 * 1.98 + 0.01 + 1.0, 1e-14);
  EXPECT_NEAR(r.points[0].expected_v, 4.9304, 1e-12);
  // rho = 1 - K1 eta / 2 + 2 L^2 eta^2 with the declared K1 = L = 1.
  EXPECT_NEAR(r.rho, 1.0 - 0.005 + 0.0002, 1e-15);
  EXPECT_GE(r.points[0].bound, r.rho * 5.0);
  EXPECT_GE(r.points[0].slack, 0.0);
  EXPECT_NEAR(r.points[1].expected_v, 0.01 + 1.0, 1e-15);
  EXPECT_TRUE(r.points[1].in_d);
  EXPECT_EQ(r.violations, 0u);
  EXPECT_TRUE(r.contractive);
}

TEST(LyapunovDrift, MissingConstants) {
  const SdeModel model = make_linear_drift(1.0, 1.0, 1);
  const std::vector<Vector> pts{{1.0}};
  EXPECT_THROW(lyapunov_drift_check(model, 0.1, pts), ConfigError);
}

TEST(LyapunovDrift, AntiDissipativeFlagged) {
  SdeModelSpec spec;
  spec.name = "lying";
  spec.drift = [](std::span<const double> x, std::span<double> out) { out[0] = x[0]; };
  spec.sigma = Matrix::identity(1);
  spec.lipschitz = 1.0;
  spec.dissipativity = Dissipativity{1.0, 0.0};
  std::vector<Vector> pts;
  for (int i = 0; i <= 100; ++i) pts.push_back({double(i)});
  const auto r = lyapunov_drift_check(SdeModel(spec), 0.1, pts);
  EXPECT_GT(r.violations, 0u);
  EXPECT_LT(r.points.back().slack, 0.0);
}

TEST(BiasCurve, ConstantObservableHasNoBias) {
  const SdeModel model = make_ou(1.0, 1.0, 1);
  const std::vector<double> etas{0.2, 0.1};
  const auto c = invariant_bias_curve(model, constant_observable(3.0), etas, 50, 3.0, NoiseStream(1));
  for (const auto& r : c.rows) EXPECT_EQ(r.bias_hat, 0.0);
}

TEST(BiasCurve, OuSquareMatchesClosedForm) {
  const SdeModel model = make_ou(1.0, 1.0, 1);
  const std::vector<double> etas{0.2, 0.1};
  const auto c = invariant_bias_curve(model, square_observable(), etas, 20000, 0.5, NoiseStream(11));
  for (const auto& r : c.rows) {
    const double exact = r.eta / (2.0 * (2.0 - r.eta));
    EXPECT_LT(std::abs(r.bias_hat - exact), 4.0 * r.std_err) << r.eta;
    EXPECT_NEAR(r.ratio_to_sqrt_eta, r.bias_hat / std::sqrt(r.eta), 1e-15);
  }
  EXPECT_NEAR(0.1 / (2.0 * 1.9), 0.026315789473684, 1e-14);
}

TEST(BiasCurve, ReferenceRunWhenNoOracle) {
  const SdeModel model = make_ou(1.0, 1.0, 1);
  const std::vector<double> etas{0.2};
  const auto c =
      invariant_bias_curve(model, square_observable(), etas, 1000, std::nullopt, NoiseStream(5));
  ASSERT_TRUE(c.oracle_std_err);
  // Reference at eta/16 = 0.0125 has pi_eta(x^2) = 1/(2 - 0.0125).
  EXPECT_LT(std::abs(c.oracle - 1.0 / 1.9875), 4.0 * *c.oracle_std_err);
}

}  // namespace
}  // namespace emfluct
