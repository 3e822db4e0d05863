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

#include "emfluct/moderate_deviation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "emfluct/error.hpp"

namespace emfluct {

namespace {

constexpr std::uint64_t kCalibrationSalt = 0x6361'6c69'6272'0001ull;

// |sigma^T grad phi(x)|^2 with caller-owned scratch.
double normalizer_term(const SdeModel& model, const SteinBundle& bundle,
                       std::span<const double> x, std::span<double> grad,
                       std::span<double> projected) {
  bundle.grad(x, grad);
  model.sigma().apply_transpose(grad, projected);
  return norm_squared(projected);
}

}  // namespace

double self_normalizer(const Trajectory& trajectory, const SteinBundle& bundle,
                       const SdeModel& model) {
  require(trajectory.dim == model.dim() && bundle.dim == model.dim(),
          "self_normalizer: dimension mismatch");
  const std::size_t m = trajectory.m();
  require(m >= 1, "self_normalizer: empty trajectory");
  Vector grad(model.dim()), projected(model.dim());
  double sum = 0.0;
  for (std::size_t k = 0; k < m; ++k)
    sum += normalizer_term(model, bundle, trajectory.state(k), grad, projected);
  return sum / static_cast<double>(m);
}

double self_normalized_stat(double pi_eta_h, double pi_h, double y_eta, double eta) {
  require(eta > 0.0, "self_normalized_stat: eta must be positive");
  require(y_eta >= 0.0, "self_normalized_stat: y_eta must be non-negative");
  if (y_eta == 0.0) throw DegenerateNormalizer();
  return (pi_eta_h - pi_h) / std::sqrt(eta) / std::sqrt(y_eta);
}

double normal_sf(double x) noexcept { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

EnsembleResult run_ensemble(const SdeModel& model, const Observable& h, double pi_h,
                            const SteinBundle& bundle, double eta, std::size_t n_replicas,
                            const NoiseStream& stream, const EnsembleOptions& options,
                            const Executor& executor) {
  require(n_replicas >= 1, "run_ensemble: need at least one replica");
  require(bundle.dim == model.dim() && static_cast<bool>(bundle.grad),
          "run_ensemble: bundle must provide a gradient of matching dimension");
  require(eta > 0.0 && eta < 1.0, "run_ensemble: eta must lie in (0, 1)");
  const std::size_t d = model.dim();
  const std::size_t m = default_chain_length(eta);
  const std::size_t burn = options.burn_in ? *options.burn_in : default_burn_in(eta, options.c_burn);
  const Vector start = options.start.empty() ? Vector(d, 0.0) : options.start;
  require(start.size() == d, "run_ensemble: start dimension mismatch");

  std::vector<ReplicaRecord> slots(n_replicas);
  executor.for_ranges(n_replicas, [&](std::size_t begin, std::size_t end) {
    Vector grad(d), projected(d);
    for (std::size_t r = begin; r < end; ++r) {
      ReplicaRecord& rec = slots[r];
      rec.seed = {stream.master_seed(), r};
      try {
        EmChain chain(model, eta, start, stream.for_replica(r), options.blowup_bound);
        chain.advance(burn);
        double sum_h = 0.0, sum_y = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
          const auto x = chain.state();
          const double v = h(x);
          if (!std::isfinite(v)) throw NonFiniteObservable(k);
          sum_h += v;
          sum_y += normalizer_term(model, bundle, x, grad, projected);
          if (k + 1 < m) chain.advance();
        }
        rec.pi_eta_h = sum_h / static_cast<double>(m);
        rec.y_eta = sum_y / static_cast<double>(m);
        rec.w_eta = rec.y_eta > 0.0 ? self_normalized_stat(rec.pi_eta_h, pi_h, rec.y_eta, eta)
                                    : std::numeric_limits<double>::quiet_NaN();
      } catch (const Divergence&) {
        rec.diverged = true;
      }
    }
  });

  EnsembleResult out;
  out.eta = eta;
  out.m = m;
  out.burn_in = burn;
  out.pi_h = pi_h;
  out.model_id = model.name();
  out.observable_id = h.name;
  out.master_seed = stream.master_seed();
  out.requested = n_replicas;
  out.records.reserve(n_replicas);
  for (std::size_t r = 0; r < n_replicas; ++r) {
    if (slots[r].diverged) {
      out.diverged_replicas.push_back(r);
    } else {
      out.records.push_back(slots[r]);
    }
  }
  if (static_cast<double>(out.diverged_replicas.size()) >
      options.divergence_budget * static_cast<double>(n_replicas))
    throw ExperimentError("run_ensemble: " + std::to_string(out.diverged_replicas.size()) +
                          " divergent replicas exceed the budget");
  return out;
}

std::vector<double> scaled_fluctuations(const EnsembleResult& ensemble) {
  std::vector<double> out;
  out.reserve(ensemble.records.size());
  const double scale = 1.0 / std::sqrt(ensemble.eta);
  for (const auto& rec : ensemble.records) out.push_back((rec.pi_eta_h - ensemble.pi_h) * scale);
  return out;
}

CltCheck clt_check_samples(std::span<const double> samples, double target_variance) {
  require(target_variance > 0.0, "clt_check: target variance must be positive");
  require(samples.size() >= 2, "clt_check: need at least two samples");
  const double sd = std::sqrt(target_variance);
  CltCheck out;
  out.ks_stat = stats::ks_statistic(samples, [sd](double x) { return stats::normal_cdf(x / sd); });
  const auto mom = stats::moments(samples);
  out.sample_mean = mom.mean;
  out.sample_variance = mom.variance;
  out.variance_ratio = mom.variance / target_variance;
  out.n = mom.n;
  return out;
}

CltCheck clt_check(const EnsembleResult& ensemble, double target_variance,
                   std::size_t min_records) {
  require(target_variance > 0.0, "clt_check: target variance must be positive");
  require(ensemble.records.size() >= std::max<std::size_t>(min_records, 2),
          "clt_check: too few non-divergent records");
  return clt_check_samples(scaled_fluctuations(ensemble), target_variance);
}

TailRatioCurve tail_ratio_curve_samples(std::span<const double> w, std::span<const double> x_grid,
                                        std::size_t min_exceed) {
  require(!w.empty(), "tail_ratio_curve: empty ensemble");
  require(std::is_sorted(x_grid.begin(), x_grid.end()), "tail_ratio_curve: grid must increase");
  const auto rows = stats::survival_table(w, x_grid, stats::Tail::greater_or_equal, min_exceed);
  TailRatioCurve curve;
  curve.n = w.size();
  for (const auto& row : rows) {
    const double sf = normal_sf(row.x);
    curve.x_grid.push_back(row.x);
    curve.sf.push_back(sf);
    curve.ratio.push_back(row.survival / sf);
    curve.ci_low.push_back(row.ci.low / sf);
    curve.ci_high.push_back(row.ci.high / sf);
    curve.n_exceed.push_back(row.n_exceed);
    curve.trusted.push_back(row.trusted);
  }
  return curve;
}

TailRatioCurve tail_ratio_curve(const EnsembleResult& ensemble, std::span<const double> x_grid,
                                std::size_t min_exceed) {
  std::vector<double> w;
  w.reserve(ensemble.records.size());
  for (const auto& rec : ensemble.records)
    if (std::isfinite(rec.w_eta)) w.push_back(rec.w_eta);
  return tail_ratio_curve_samples(w, x_grid, min_exceed);
}

StationarySumTable stationary_sum_concentration(const SdeModel& model, const SteinBundle& bundle,
                                                double eta, std::size_t k, std::size_t replicas,
                                                std::span<const double> y_grid,
                                                const NoiseStream& stream,
                                                const StationarySumOptions& options,
                                                const Executor& executor) {
  require(k >= 1 && replicas >= 2, "stationary_sum_concentration: need k >= 1 and replicas >= 2");
  require(bundle.dim == model.dim() && static_cast<bool>(bundle.grad),
          "stationary_sum_concentration: bundle must provide a gradient");
  const std::size_t d = model.dim();
  const std::size_t burn = default_burn_in(eta, options.tail.c_burn);
  const Vector start = options.tail.start.empty() ? Vector(d, 0.0) : options.tail.start;

  StationarySumTable out;
  out.k = k;
  if (options.mu) {
    out.mu_hat = *options.mu;
  } else {
    require(options.calibration_steps >= 1, "stationary_sum_concentration: empty calibration");
    EmChain chain(model, eta, start, stream.fork(kCalibrationSalt));
    chain.advance(10 * burn);
    Vector grad(d), projected(d);
    double sum = 0.0;
    for (std::size_t i = 0; i < options.calibration_steps; ++i) {
      sum += normalizer_term(model, bundle, chain.state(), grad, projected);
      chain.advance();
    }
    out.mu_hat = sum / static_cast<double>(options.calibration_steps);
  }

  std::vector<double> values(replicas, 0.0);
  std::vector<unsigned char> diverged(replicas, 0);
  const double centre = static_cast<double>(k) * out.mu_hat;
  executor.for_ranges(replicas, [&](std::size_t begin, std::size_t end) {
    Vector grad(d), projected(d);
    for (std::size_t r = begin; r < end; ++r) {
      try {
        EmChain chain(model, eta, start, stream.for_replica(r));
        chain.advance(burn);
        double sum = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
          sum += normalizer_term(model, bundle, chain.state(), grad, projected);
          if (i + 1 < k) chain.advance();
        }
        values[r] = std::abs(sum - centre);
      } catch (const Divergence&) {
        diverged[r] = 1;
      }
    }
  });

  std::vector<double> kept;
  kept.reserve(replicas);
  for (std::size_t r = 0; r < replicas; ++r) {
    if (diverged[r]) {
      ++out.table.diverged;
    } else {
      kept.push_back(values[r]);
    }
  }
  if (static_cast<double>(out.table.diverged) > 0.01 * static_cast<double>(replicas))
    throw ExperimentError("stationary_sum_concentration: divergent replicas exceed the 1% budget");
  out.table.sample = stats::moments(kept);
  std::vector<double> grid(y_grid.begin(), y_grid.end());
  if (grid.empty())
    grid = stats::quantile_grid(kept, options.tail.levels.empty() ? default_tail_levels()
                                                                  : options.tail.levels);
  out.table.rows =
      stats::survival_table(kept, grid, stats::Tail::strictly_greater, options.tail.min_exceed);
  out.table.fit_from = grid.front();
  const double kd = static_cast<double>(k);
  out.table.fit = stats::fit_log_survival(out.table.rows, [kd](double y) { return y * y / kd; },
                                          out.table.fit_from);
  return out;
}

}  // namespace emfluct
