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

#include "emfluct/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "emfluct/error.hpp"

namespace emfluct {

QuadratureRule gauss_legendre_unit(int order) {
  require(order >= 1, "gauss_legendre_unit: order must be positive");
  const auto n = static_cast<std::size_t>(order);
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  // Newton iteration on P_n over [-1, 1], then map to [0, 1].
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (std::size_t j = 1; j <= n; ++j) {
        const double p2 = p1;
        p1 = p0;
        const auto jd = static_cast<double>(j);
        p0 = ((2.0 * jd - 1.0) * z * p1 - (jd - 1.0) * p2) / jd;
      }
      dp = static_cast<double>(n) * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    if (n == 1) dp = 1.0;  // P_1 = z, root 0; the formula above is 0/0-free
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    rule.nodes[i] = 0.5 * (1.0 - z);
    rule.nodes[n - 1 - i] = 0.5 * (1.0 + z);
    rule.weights[i] = 0.5 * w;
    rule.weights[n - 1 - i] = 0.5 * w;
  }
  return rule;
}

double decomposition_scale(double eta, std::size_t m) {
  require(m >= 1 && eta > 0.0, "decomposition_scale: need m >= 1 and eta > 0");
  return 1.0 / (static_cast<double>(m) * eta * std::sqrt(eta));
}

double martingale_part(const Trajectory& trajectory, const SteinBundle& bundle,
                       const SdeModel& model) {
  require(trajectory.dim == model.dim() && bundle.dim == model.dim(),
          "martingale_part: dimension mismatch");
  const std::size_t d = model.dim(), m = trajectory.m();
  require(m >= 1, "martingale_part: empty trajectory");
  Vector grad(d), s(d);
  double sum = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    bundle.grad(trajectory.state(k), grad);
    model.apply_sigma(trajectory.noise(k), s);
    sum += dot(grad, s);
  }
  return -decomposition_scale(trajectory.eta, m) * std::sqrt(trajectory.eta) * sum;
}

RemainderTerms remainder_terms(const Trajectory& trajectory, const SteinBundle& bundle,
                               const SdeModel& model, int quad_order, TaylorKernel kernel) {
  require(trajectory.dim == model.dim() && bundle.dim == model.dim(),
          "remainder_terms: dimension mismatch");
  require(quad_order >= 1, "remainder_terms: quad_order must be positive");
  if (!bundle.hess) throw CapabilityError("remainder_terms: R_2, R_3, R_5 need the Hessian of phi");
  if (!bundle.third)
    throw CapabilityError("remainder_terms: R_4, R_5 (second summand) and R_6 need the third "
                          "derivative of phi");
  const std::size_t d = model.dim(), m = trajectory.m();
  require(m >= 1, "remainder_terms: empty trajectory");
  const double eta = trajectory.eta;
  const double se = std::sqrt(eta);
  const double kappa = decomposition_scale(eta, m);
  const QuadratureRule rule = gauss_legendre_unit(quad_order);
  std::vector<double> w(rule.weights);
  if (kernel == TaylorKernel::integral_remainder)
    for (std::size_t q = 0; q < w.size(); ++q)
      w[q] *= 3.0 * (1.0 - rule.nodes[q]) * (1.0 - rule.nodes[q]);

  const auto ss_t = model.sigma_sigma_t().data();
  Vector g(d), s(d), hess(d * d), third(d * d * d), delta(d), point(d);
  double r2 = 0.0, r3 = 0.0, r4 = 0.0, r5h = 0.0, r5t = 0.0, r6a = 0.0, r6b = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const auto theta = trajectory.state(k);
    const auto next = trajectory.state(k + 1);
    model.drift(theta, g);
    model.apply_sigma(trajectory.noise(k), s);
    bundle.hess(theta, hess);
    for (std::size_t i = 0; i < d; ++i) delta[i] = next[i] - theta[i];

    double hs_noise = 0.0;
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j)
        hs_noise += hess[i * d + j] * (s[i] * s[j] - ss_t[i * d + j]);
    r2 += hs_noise;
    r3 += hs_outer(hess, g, s) + hs_outer(hess, s, g);
    r5h += hs_outer(hess, g, g);

    double i_sss = 0.0, i_ggg = 0.0, i_gss = 0.0, i_ggs = 0.0;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      for (std::size_t i = 0; i < d; ++i) point[i] = theta[i] + rule.nodes[q] * delta[i];
      bundle.third(point, third);
      i_sss += w[q] * contract3(third, s, s, s);
      i_ggg += w[q] * contract3(third, g, g, g);
      i_gss += w[q] * contract3(third, g, s, s);
      i_ggs += w[q] * contract3(third, g, g, s);
    }
    r4 += i_sss;
    r5t += i_ggg;
    r6a += i_gss;
    r6b += i_ggs;
  }

  RemainderTerms out;
  const double e32 = eta * se, e2 = eta * eta, e3 = e2 * eta;
  out.r[0] = kappa * (bundle.phi(trajectory.state(0)) - bundle.phi(trajectory.state(m)));
  out.r[1] = kappa * eta / 2.0 * r2;
  out.r[2] = kappa * e32 / 2.0 * r3;
  out.r[3] = kappa * e32 / 6.0 * r4;
  out.r5_hessian = kappa * e2 / 2.0 * r5h;
  out.r5_third = kappa * e3 / 6.0 * r5t;
  out.r[4] = out.r5_hessian + out.r5_third;
  out.r[5] = kappa * e2 / 2.0 * (r6a + se * r6b);
  return out;
}

DecompositionReport decomposition_residual(const Trajectory& trajectory, const Observable& h,
                                           double pi_h, const SteinBundle& bundle,
                                           const SdeModel& model,
                                           const DecompositionOptions& options) {
  const std::size_t m = trajectory.m();
  require(m >= 1, "decomposition_residual: empty trajectory");
  // Capability first: the precheck may be expensive for Monte Carlo bundles.
  if (!bundle.third)
    throw CapabilityError("decomposition_residual: R_4, R_5 (second summand) and R_6 need the "
                          "third derivative of phi");
  if (options.stein_tolerance) {
    const std::size_t n = std::min(options.precheck_points, m);
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t k = n == 1 ? 0 : i * (m - 1) / (n - 1);
      const auto x = trajectory.state(k);
      const double hv = h(x);
      const double r = std::abs(generator_apply(model, bundle, x) - (hv - pi_h)) / (1.0 + std::abs(hv));
      worst = std::max(worst, r);
    }
    if (worst > *options.stein_tolerance) throw MismatchedBundle(worst, *options.stein_tolerance);
  }

  DecompositionReport rep;
  rep.eta = trajectory.eta;
  rep.m = m;
  rep.quad_order = options.quad_order;
  rep.lhs = (pi_eta_average(trajectory, h) - pi_h) / std::sqrt(trajectory.eta);
  rep.h_part = martingale_part(trajectory, bundle, model);
  const RemainderTerms terms = remainder_terms(trajectory, bundle, model, options.quad_order,
                                               options.kernel);
  rep.r_parts = terms.r;
  rep.r5_third = terms.r5_third;
  double sum = 0.0;
  for (double r : terms.r) sum += r;
  rep.remainder = -sum;
  rep.residual = rep.lhs - rep.h_part - rep.remainder;
  return rep;
}

std::vector<double> default_tail_levels(std::size_t count) {
  require(count >= 2, "default_tail_levels: need at least two levels");
  std::vector<double> levels(count);
  const double lo = std::log(0.5), hi = std::log(0.001);
  for (std::size_t i = 0; i < count; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(count - 1);
    levels[i] = 1.0 - std::exp(lo + t * (hi - lo));
  }
  return levels;
}

namespace {

std::vector<double> grid_or_quantiles(std::span<const double> samples,
                                      std::span<const double> x_grid,
                                      const std::vector<double>& levels) {
  if (!x_grid.empty()) return {x_grid.begin(), x_grid.end()};
  const std::vector<double> probs = levels.empty() ? default_tail_levels() : levels;
  return stats::quantile_grid(samples, probs);
}

}  // namespace

TailTable concentration_g_probe(const SdeModel& model, double eta, std::size_t m,
                                std::size_t replicas, std::span<const double> x_grid,
                                const NoiseStream& stream, const TailProbeOptions& options,
                                const Executor& executor) {
  require(replicas >= 2 && m >= 1, "concentration_g_probe: need replicas >= 2 and m >= 1");
  const std::size_t d = model.dim();
  const std::size_t burn = default_burn_in(eta, options.c_burn);
  const Vector start = options.start.empty() ? Vector(d, 0.0) : options.start;
  std::vector<double> values(replicas, 0.0);
  std::vector<unsigned char> diverged(replicas, 0);
  executor.for_ranges(replicas, [&](std::size_t begin, std::size_t end) {
    Vector g(d);
    for (std::size_t r = begin; r < end; ++r) {
      try {
        EmChain chain(model, eta, start, stream.for_replica(r));
        chain.advance(burn);
        double acc = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
          model.drift(chain.state(), g);
          acc += norm_squared(g);
          if (k + 1 < m) chain.advance();
        }
        values[r] = eta * acc;
      } catch (const Divergence&) {
        diverged[r] = 1;
      }
    }
  });
  TailTable table;
  std::vector<double> kept;
  for (std::size_t r = 0; r < replicas; ++r) {
    if (diverged[r]) {
      ++table.diverged;
    } else {
      kept.push_back(values[r]);
    }
  }
  if (static_cast<double>(table.diverged) > 0.01 * static_cast<double>(replicas))
    throw ExperimentError("concentration_g_probe: divergent replicas exceed the 1% budget");
  table.sample = stats::moments(kept);
  const auto grid = grid_or_quantiles(kept, x_grid, options.levels);
  table.rows = stats::survival_table(kept, grid, stats::Tail::strictly_greater, options.min_exceed);
  table.fit_from = stats::quantile_grid(grid, std::vector<double>{0.75})[0];
  table.fit = stats::fit_log_survival(table.rows, [](double x) { return x; }, table.fit_from);
  return table;
}

std::vector<RemainderTail> remainder_tail_probe(const SdeModel& model, const Observable& h,
                                                double pi_h, const SteinBundle& bundle,
                                                std::span<const double> eta_list,
                                                std::size_t replicas, const NoiseStream& stream,
                                                const RemainderProbeOptions& options,
                                                const Executor& executor) {
  require(!eta_list.empty() && replicas >= 2, "remainder_tail_probe: need etas and replicas");
  if (!bundle.third)
    throw CapabilityError("remainder_tail_probe: R_4 and R_6 need the third derivative of phi");
  const std::size_t d = model.dim();
  const Vector start = options.tail.start.empty() ? Vector(d, 0.0) : options.tail.start;
  std::vector<RemainderTail> out;
  for (double eta : eta_list) {
    EmConfig config = EmConfig::standard(eta, start, default_burn_in(eta, options.tail.c_burn));
    std::vector<double> values(replicas, 0.0);
    std::vector<unsigned char> diverged(replicas, 0);
    executor.for_ranges(replicas, [&](std::size_t begin, std::size_t end) {
      for (std::size_t r = begin; r < end; ++r) {
        try {
          const Trajectory traj = simulate_trajectory(model, config, stream.for_replica(r));
          const RemainderTerms t = remainder_terms(traj, bundle, model, options.quad_order);
          double sum = 0.0;
          for (double v : t.r) sum += v;
          values[r] = std::abs(sum);
        } catch (const Divergence&) {
          diverged[r] = 1;
        }
      }
    });
    RemainderTail tail;
    tail.eta = eta;
    tail.m = config.m;
    std::vector<double> kept;
    for (std::size_t r = 0; r < replicas; ++r) {
      if (diverged[r]) {
        ++tail.diverged;
      } else {
        kept.push_back(values[r]);
      }
    }
    if (static_cast<double>(tail.diverged) > 0.01 * static_cast<double>(replicas))
      throw ExperimentError("remainder_tail_probe: divergent replicas exceed the 1% budget");
    (void)h;
    (void)pi_h;
    const auto grid = grid_or_quantiles(kept, {}, options.tail.levels);
    tail.rows = stats::survival_table(kept, grid, stats::Tail::strictly_greater,
                                      options.tail.min_exceed);
    const auto q = stats::quantile_grid(kept, std::vector<double>{0.5, 0.99});
    tail.median_abs = q[0];
    tail.q99_abs = q[1];
    const double x0[] = {options.x0};
    tail.at_x0 = stats::survival_table(kept, x0, stats::Tail::strictly_greater,
                                       options.tail.min_exceed)[0];
    out.push_back(std::move(tail));
  }
  return out;
}

}  // namespace emfluct
