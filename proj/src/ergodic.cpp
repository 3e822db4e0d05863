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

#include "emfluct/ergodic.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "emfluct/error.hpp"
#include "emfluct/stats.hpp"

namespace emfluct {

namespace {

constexpr std::uint64_t kReferenceRunSalt = 0x7265'6672'756e'0001ull;

}  // namespace

Observable identity_observable() {
  return {"identity", [](std::span<const double> x) { return x[0]; },
          "unbounded (linear); closed-form oracle only"};
}

Observable square_observable() {
  return {"square", [](std::span<const double> x) { return norm_squared(x); },
          "unbounded (quadratic); closed-form oracle only"};
}

Observable tanh_observable() {
  return {"tanh", [](std::span<const double> x) { return std::tanh(x[0]); },
          "bounded with bounded derivatives (C_b^2)"};
}

Observable constant_observable(double value) {
  return {"constant", [value](std::span<const double>) { return value; }, "constant (C_b^2)"};
}

double pi_eta_average(const Trajectory& trajectory, const Observable& h) {
  const std::size_t m = trajectory.m();
  require(m >= 1, "pi_eta_average: empty trajectory");
  double sum = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const double v = h(trajectory.state(k));
    if (!std::isfinite(v)) throw NonFiniteObservable(k);
    sum += v;
  }
  return sum / static_cast<double>(m);
}

Vector sample_stationary(const SdeModel& model, double eta, const StationaryOptions& options,
                         NoiseStream stream) {
  Vector start = options.start.empty() ? Vector(model.dim(), 0.0) : options.start;
  EmChain chain(model, eta, start, std::move(stream), options.blowup_bound);
  chain.advance(options.burn_in);
  return Vector(chain.state().begin(), chain.state().end());
}

OuMoments ou_exact_moments(const OuClosedForm& cf) {
  require(cf.a > 0.0 && cf.sigma > 0.0 && cf.eta > 0.0, "ou_exact_moments: parameters must be positive");
  require(cf.a * cf.eta < 1.0, "ou_exact_moments: need a*eta < 1");
  const double s2 = cf.sigma * cf.sigma;
  return {0.0, s2 / (2.0 * cf.a - cf.a * cf.a * cf.eta), s2 / (2.0 * cf.a)};
}

DriftReport lyapunov_drift_check(const SdeModel& model, double eta,
                                 std::span<const Vector> points) {
  const auto lip = model.lipschitz();
  const auto diss = model.dissipativity();
  if (!lip || !diss)
    throw ConfigError("lyapunov_drift_check: model '" + model.name() +
                      "' must declare L, K1 and K2");
  require(eta > 0.0 && eta < 1.0, "lyapunov_drift_check: eta must lie in (0, 1)");
  const std::size_t d = model.dim();
  const double L = *lip, k1 = diss->k1, k2 = diss->k2;

  Vector zero(d, 0.0);
  const double g0_sq = norm_squared(model.drift_at(zero));
  // <x, g(x)> <= -K1/2 |x|^2 + c with c = K2 + |g(0)|^2 / (2 K1).
  const double c = k2 + g0_sq / (2.0 * k1);
  const double sigma_hs = model.sigma().frobenius_squared();

  DriftReport report;
  report.rho = 1.0 - 0.5 * k1 * eta + 2.0 * L * L * eta * eta;
  report.b = 0.5 * k1 * eta - 2.0 * L * L * eta * eta + 2.0 * g0_sq * eta * eta +
             eta * sigma_hs + 2.0 * c * eta;
  report.d_radius = 2.0 * report.b / (eta * k1);
  report.contractive = report.rho < 1.0;

  const double trace = model.sigma_sigma_t().trace();
  Vector g(d), mean_next(d);
  for (const Vector& theta : points) {
    require(theta.size() == d, "lyapunov_drift_check: point dimension mismatch");
    model.drift(theta, g);
    if (!all_finite(g)) throw NonFiniteDrift(theta, -1);
    for (std::size_t i = 0; i < d; ++i) mean_next[i] = theta[i] + eta * g[i];
    DriftPoint p;
    p.point = theta;
    p.expected_v = norm_squared(mean_next) + eta * trace + 1.0;
    p.in_d = norm(theta) <= report.d_radius;
    p.bound = report.rho * (norm_squared(theta) + 1.0) + (p.in_d ? report.b : 0.0);
    p.slack = p.bound - p.expected_v;
    if (p.slack < -1e-12 * std::max(1.0, p.bound)) ++report.violations;
    report.points.push_back(std::move(p));
  }
  return report;
}

namespace {

struct DrawSummary {
  stats::Moments moments;
  std::size_t diverged = 0;
};

DrawSummary stationary_mean(const SdeModel& model, const Observable& f, double eta,
                            std::size_t draws, std::size_t burn_in, const NoiseStream& stream,
                            const BiasOptions& options, const Executor& executor) {
  std::vector<double> values(draws, 0.0);
  std::vector<unsigned char> diverged(draws, 0);
  StationaryOptions so{burn_in, options.start, options.blowup_bound};
  executor.for_ranges(draws, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      try {
        const Vector x = sample_stationary(model, eta, so, stream.for_replica(i));
        values[i] = f(x);
        if (!std::isfinite(values[i])) throw NonFiniteObservable(i);
      } catch (const Divergence&) {
        diverged[i] = 1;
      }
    }
  });
  DrawSummary out;
  std::vector<double> kept;
  kept.reserve(draws);
  for (std::size_t i = 0; i < draws; ++i) {
    if (diverged[i]) {
      ++out.diverged;
    } else {
      kept.push_back(values[i]);
    }
  }
  if (static_cast<double>(out.diverged) > 0.01 * static_cast<double>(draws))
    throw ExperimentError("stationary draws: divergent replicas exceed the 1% budget");
  out.moments = stats::moments(kept);
  return out;
}

}  // namespace

BiasCurve invariant_bias_curve(const SdeModel& model, const Observable& f,
                               std::span<const double> eta_list, std::size_t draws,
                               std::optional<double> oracle_pi_f, const NoiseStream& stream,
                               const BiasOptions& options, const Executor& executor) {
  require(!eta_list.empty(), "invariant_bias_curve: empty eta list");
  require(draws >= 2, "invariant_bias_curve: need at least two draws");
  BiasCurve curve;
  if (oracle_pi_f) {
    curve.oracle = *oracle_pi_f;
  } else {
    const double eta_ref = *std::min_element(eta_list.begin(), eta_list.end()) / 16.0;
    const std::size_t burn = 10 * default_burn_in(eta_ref, options.c_burn);
    const auto ref = stationary_mean(model, f, eta_ref, draws, burn,
                                     stream.fork(kReferenceRunSalt), options, executor);
    curve.oracle = ref.moments.mean;
    curve.oracle_std_err = ref.moments.std_err;
    curve.diverged += ref.diverged;
  }
  for (double eta : eta_list) {
    const auto s = stationary_mean(model, f, eta, draws, default_burn_in(eta, options.c_burn),
                                   stream, options, executor);
    BiasRow row;
    row.eta = eta;
    row.estimate = s.moments.mean;
    row.std_err = s.moments.std_err;
    row.oracle = curve.oracle;
    row.bias_hat = std::abs(row.estimate - curve.oracle);
    row.ratio_to_sqrt_eta = row.bias_hat / std::sqrt(eta);
    row.inconclusive = row.std_err > 0.5 * row.bias_hat;
    curve.diverged += s.diverged;
    curve.rows.push_back(row);
  }
  return curve;
}

}  // namespace emfluct
