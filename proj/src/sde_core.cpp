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

#include "emfluct/sde_core.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "emfluct/error.hpp"
#include "emfluct/stats.hpp"

namespace emfluct {

namespace {

// The common step kernel. `scaled` receives sigma*xi, then out is assembled
// in the documented association order.
inline void step_into(const SdeModel& model, std::span<const double> state, double eta,
                      double sqrt_eta, std::span<const double> noise, std::span<double> drift,
                      std::span<double> scaled, std::span<double> out) {
  model.drift(state, drift);
  model.apply_sigma(noise, scaled);
  for (std::size_t i = 0; i < state.size(); ++i)
    out[i] = (state[i] + eta * drift[i]) + sqrt_eta * scaled[i];
}

void check_eta(double eta) {
  require(eta > 0.0 && eta < 1.0, "eta must lie in (0, 1)");
}

}  // namespace

SdeModel::SdeModel(SdeModelSpec spec) : spec_(std::move(spec)) {
  require(spec_.dim >= 1, "SdeModel: dimension must be positive");
  require(static_cast<bool>(spec_.drift), "SdeModel: drift is required");
  require(spec_.sigma.size() == spec_.dim, "SdeModel: sigma must be d x d");
  require(std::abs(spec_.sigma.determinant()) > 0.0, "SdeModel: sigma must be invertible");
  if (spec_.lipschitz) require(*spec_.lipschitz > 0.0, "SdeModel: L must be positive");
  if (spec_.dissipativity)
    require(spec_.dissipativity->k1 > 0.0 && spec_.dissipativity->k2 >= 0.0,
            "SdeModel: dissipativity needs K1 > 0, K2 >= 0");
  if (spec_.drift_hessian_bound)
    require(*spec_.drift_hessian_bound >= 0.0, "SdeModel: Hessian bound must be nonnegative");
  sigma_sigma_t_ = spec_.sigma.times_transpose(spec_.sigma);
  sigma_diagonal_ = spec_.sigma.is_diagonal();
}

Vector SdeModel::drift_at(std::span<const double> x) const {
  Vector out(dim());
  drift(x, out);
  return out;
}

void SdeModel::apply_sigma(std::span<const double> xi, std::span<double> out) const noexcept {
  if (sigma_diagonal_) {
    // Bitwise equal to the dense product: the off-diagonal terms add +0.
    for (std::size_t i = 0; i < xi.size(); ++i) out[i] = spec_.sigma(i, i) * xi[i];
  } else {
    spec_.sigma.apply(xi, out);
  }
}

SdeModel make_ou(double a, double sigma, std::size_t dim) {
  require(a > 0.0 && sigma > 0.0, "make_ou: a and sigma must be positive");
  SdeModelSpec spec;
  spec.name = "ou";
  spec.dim = dim;
  spec.drift = [a](std::span<const double> x, std::span<double> out) {
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = -a * x[i];
  };
  spec.sigma = Matrix::identity(dim, sigma);
  spec.lipschitz = a;
  spec.dissipativity = Dissipativity{a, 0.0};
  spec.drift_hessian_bound = 0.0;
  return SdeModel(std::move(spec));
}

SdeModel make_double_well(double sigma) {
  require(sigma > 0.0, "make_double_well: sigma must be positive");
  SdeModelSpec spec;
  spec.name = "double_well";
  spec.dim = 1;
  spec.drift = [](std::span<const double> x, std::span<double> out) {
    out[0] = x[0] - x[0] * x[0] * x[0];
  };
  spec.sigma = Matrix::identity(1, sigma);
  // (x-y)^2 (1.5 - (x^2+xy+y^2)) <= u^2 (1.5 - u^2/4) <= 9/4 with u = x-y.
  spec.lipschitz = 11.0;
  spec.dissipativity = Dissipativity{0.5, 2.25};
  spec.drift_hessian_bound = 12.0;
  return SdeModel(std::move(spec));
}

SdeModel make_linear_drift(double c, double sigma, std::size_t dim) {
  SdeModelSpec spec;
  spec.name = "linear";
  spec.dim = dim;
  spec.drift = [c](std::span<const double> x, std::span<double> out) {
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = c * x[i];
  };
  spec.sigma = Matrix::identity(dim, sigma);
  return SdeModel(std::move(spec));
}

SdeModel make_zero_drift(double sigma, std::size_t dim) {
  SdeModelSpec spec;
  spec.name = "zero";
  spec.dim = dim;
  spec.drift = [](std::span<const double>, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
  };
  spec.sigma = Matrix::identity(dim, sigma);
  spec.lipschitz = std::nullopt;
  return SdeModel(std::move(spec));
}

std::size_t default_chain_length(double eta) {
  check_eta(eta);
  const double inv = 1.0 / (eta * eta);
  const double nearest = std::round(inv);
  if (std::abs(inv - nearest) <= 1e-9 * inv) return static_cast<std::size_t>(nearest);
  return static_cast<std::size_t>(std::floor(inv));
}

std::size_t default_burn_in(double eta, double c_burn) {
  check_eta(eta);
  require(c_burn >= 0.0, "default_burn_in: c_burn must be nonnegative");
  return static_cast<std::size_t>(std::ceil(c_burn / eta * std::log(1.0 / eta)));
}

EmConfig EmConfig::standard(double eta, Vector initial_state, std::size_t burn_in) {
  EmConfig config;
  config.eta = eta;
  config.m = default_chain_length(eta);
  config.burn_in = burn_in;
  config.initial_state = std::move(initial_state);
  return config;
}

void EmConfig::validate(std::size_t dim) const {
  check_eta(eta);
  require(m >= 1, "EmConfig: m must be at least 1");
  require(initial_state.size() == dim, "EmConfig: initial state dimension mismatch");
  require(blowup_bound > 0.0, "EmConfig: blow-up bound must be positive");
}

Vector em_step(const SdeModel& model, std::span<const double> state, double eta,
               std::span<const double> noise) {
  check_eta(eta);
  require(state.size() == model.dim() && noise.size() == model.dim(),
          "em_step: dimension mismatch");
  Vector drift(model.dim()), scaled(model.dim()), out(model.dim());
  step_into(model, state, eta, std::sqrt(eta), noise, drift, scaled, out);
  if (!all_finite(drift)) throw NonFiniteDrift(Vector(state.begin(), state.end()), -1);
  return out;
}

EmChain::EmChain(const SdeModel& model, double eta, std::span<const double> start,
                 NoiseStream stream, double blowup_bound)
    : model_(&model),
      eta_(eta),
      sqrt_eta_(std::sqrt(eta)),
      blowup_bound_(blowup_bound),
      stream_(std::move(stream)),
      state_(start.begin(), start.end()),
      next_(model.dim()),
      noise_(model.dim()),
      drift_(model.dim()),
      scaled_noise_(model.dim()) {
  check_eta(eta);
  require(start.size() == model.dim(), "EmChain: start dimension mismatch");
}

void EmChain::advance() {
  stream_.next_normal(noise_);
  step_into(*model_, state_, eta_, sqrt_eta_, noise_, drift_, scaled_noise_, next_);
  ++steps_;
  if (!all_finite(drift_)) throw NonFiniteDrift(state_, static_cast<std::int64_t>(steps_));
  // Squared comparison keeps the sqrt off the hot path; NaN fails it too.
  if (!(norm_squared(next_) <= blowup_bound_ * blowup_bound_))
    throw Divergence(static_cast<std::int64_t>(steps_), norm(next_), blowup_bound_);
  state_.swap(next_);
}

Trajectory simulate_trajectory(const SdeModel& model, const EmConfig& config, NoiseStream stream) {
  config.validate(model.dim());
  const std::size_t d = model.dim();
  Trajectory traj;
  traj.eta = config.eta;
  traj.dim = d;
  traj.seed = {stream.master_seed(), stream.replica_index()};
  EmChain chain(model, config.eta, config.initial_state, std::move(stream), config.blowup_bound);
  chain.advance(config.burn_in);
  traj.states.reserve((config.m + 1) * d);
  traj.noises.reserve(config.m * d);
  traj.states.insert(traj.states.end(), chain.state().begin(), chain.state().end());
  for (std::size_t k = 0; k < config.m; ++k) {
    chain.advance();
    traj.noises.insert(traj.noises.end(), chain.last_noise().begin(), chain.last_noise().end());
    traj.states.insert(traj.states.end(), chain.state().begin(), chain.state().end());
  }
  return traj;
}

bool replays_exactly(const Trajectory& trajectory, const SdeModel& model) {
  if (trajectory.dim != model.dim()) return false;
  if (trajectory.states.size() != (trajectory.m() + 1) * trajectory.dim) return false;
  const std::size_t d = model.dim();
  Vector drift(d), scaled(d), out(d);
  const double sqrt_eta = std::sqrt(trajectory.eta);
  for (std::size_t k = 0; k < trajectory.m(); ++k) {
    step_into(model, trajectory.state(k), trajectory.eta, sqrt_eta, trajectory.noise(k), drift,
              scaled, out);
    const auto next = trajectory.state(k + 1);
    if (!std::equal(out.begin(), out.end(), next.begin())) return false;
  }
  return true;
}

AssumptionReport probe_assumptions(const SdeModel& model, const ProbeBox& box,
                                   std::size_t n_pairs, NoiseStream stream,
                                   const ProbeOptions& options) {
  const std::size_t d = model.dim();
  require(n_pairs >= 2, "probe_assumptions: need at least two pairs");
  require(box.lower.size() == d && box.upper.size() == d, "probe_assumptions: box dimension");
  for (std::size_t i = 0; i < d; ++i)
    require(box.upper[i] > box.lower[i], "probe_assumptions: degenerate box");

  AssumptionReport report;
  report.n_pairs = n_pairs;
  std::vector<double> inner(n_pairs), sq(n_pairs);
  std::vector<ProbePair> pairs(n_pairs);
  Vector u(2 * d), gx(d), gy(d), dx(d), dg(d);
  const auto lipschitz = model.lipschitz();
  const auto diss = model.dissipativity();

  for (std::size_t p = 0; p < n_pairs; ++p) {
    stream.next_uniform(u);
    ProbePair& pair = pairs[p];
    pair.x.resize(d);
    pair.y.resize(d);
    for (std::size_t i = 0; i < d; ++i) {
      const double w = box.upper[i] - box.lower[i];
      pair.x[i] = box.lower[i] + w * u[i];
      pair.y[i] = box.lower[i] + w * u[d + i];
    }
    model.drift(pair.x, gx);
    model.drift(pair.y, gy);
    if (!all_finite(gx)) throw NonFiniteDrift(pair.x, -1);
    if (!all_finite(gy)) throw NonFiniteDrift(pair.y, -1);
    for (std::size_t i = 0; i < d; ++i) {
      dx[i] = pair.x[i] - pair.y[i];
      dg[i] = gx[i] - gy[i];
    }
    inner[p] = dot(dg, dx);
    sq[p] = norm_squared(dx);
    if (sq[p] > 0.0) {
      const double ratio = norm(dg) / std::sqrt(sq[p]);
      report.max_lipschitz_ratio = std::max(report.max_lipschitz_ratio, ratio);
      if (lipschitz && ratio > *lipschitz * (1.0 + options.tolerance)) {
        ++report.lipschitz_violations;
        if (!report.first_violation) report.first_violation = pair;
      }
    }
    if (diss && inner[p] > -diss->k1 * sq[p] + diss->k2 * (1.0 + options.tolerance) +
                               options.tolerance) {
      ++report.dissipativity_violations;
      if (!report.first_violation) report.first_violation = pair;
    }
  }

  const auto fit = stats::least_squares(sq, inner);
  report.k1_hat = -fit.slope;
  double k2 = 0.0;
  for (std::size_t p = 0; p < n_pairs; ++p) k2 = std::max(k2, inner[p] + report.k1_hat * sq[p]);
  report.k2_hat = k2;
  report.dissipative_fit = report.k1_hat > 0.0 && report.k2_hat <= options.k2_cap;
  return report;
}

StrongErrorTable strong_error_mse(const SdeModel& model, const StrongErrorSpec& spec,
                                  const NoiseStream& stream, const Executor& executor) {
  const std::size_t d = model.dim();
  require(!spec.eta_list.empty(), "strong_error_mse: empty eta list");
  require(spec.T > 0.0, "strong_error_mse: T must be positive");
  require(spec.replicas >= 1, "strong_error_mse: need replicas");
  Vector x0 = spec.initial_state.empty() ? Vector(d, 0.0) : spec.initial_state;
  require(x0.size() == d, "strong_error_mse: initial state dimension");

  const double eta_min = *std::min_element(spec.eta_list.begin(), spec.eta_list.end());
  const double eta_ref = spec.reference_eta.value_or(eta_min / 64.0);
  check_eta(eta_ref);

  const std::size_t levels = spec.eta_list.size();
  std::vector<std::size_t> ratio(levels), coarse_steps(levels);
  std::size_t fine_steps = 0;
  for (std::size_t l = 0; l < levels; ++l) {
    const double eta = spec.eta_list[l];
    check_eta(eta);
    const double r = eta / eta_ref;
    const double rr = std::round(r);
    require(rr >= 1.0 && std::abs(r - rr) <= 1e-9 * r, "strong_error_mse: eta must be a multiple of eta_ref");
    const auto ri = static_cast<std::size_t>(rr);
    require((ri & (ri - 1)) == 0, "strong_error_mse: eta / eta_ref must be a power of two");
    ratio[l] = ri;
    coarse_steps[l] = static_cast<std::size_t>(std::floor(spec.T / eta * (1.0 + 1e-12)));
    require(coarse_steps[l] >= 1, "strong_error_mse: T shorter than one step");
    fine_steps = std::max(fine_steps, coarse_steps[l] * ri);
  }

  // err[r * levels + l] = |theta_ref - theta_eta|^2, NaN for a diverged replica.
  std::vector<double> err(spec.replicas * levels, 0.0);
  std::vector<unsigned char> diverged(spec.replicas, 0);

  executor.for_ranges(spec.replicas, [&](std::size_t begin, std::size_t end) {
    Vector fine_drift(d), fine_scaled(d), fine_next(d), noise(d), coarse_noise(d);
    std::vector<Vector> coarse(levels), sums(levels);
    std::vector<std::size_t> taken(levels);
    const double sqrt_ref = std::sqrt(eta_ref);
    for (std::size_t rep = begin; rep < end; ++rep) {
      NoiseStream s = stream.for_replica(rep);
      Vector fine = x0;
      for (std::size_t l = 0; l < levels; ++l) {
        coarse[l] = x0;
        sums[l].assign(d, 0.0);
        taken[l] = 0;
      }
      try {
        for (std::size_t j = 0; j < fine_steps; ++j) {
          s.next_normal(noise);
          step_into(model, fine, eta_ref, sqrt_ref, noise, fine_drift, fine_scaled, fine_next);
          if (!all_finite(fine_drift)) throw NonFiniteDrift(fine, static_cast<std::int64_t>(j + 1));
          if (!(norm(fine_next) <= spec.blowup_bound))
            throw Divergence(static_cast<std::int64_t>(j + 1), norm(fine_next), spec.blowup_bound);
          fine.swap(fine_next);
          for (std::size_t l = 0; l < levels; ++l) {
            if (taken[l] == coarse_steps[l]) continue;
            for (std::size_t i = 0; i < d; ++i) sums[l][i] += noise[i];
            if ((j + 1) % ratio[l] != 0) continue;
            const double scale = 1.0 / std::sqrt(static_cast<double>(ratio[l]));
            for (std::size_t i = 0; i < d; ++i) coarse_noise[i] = sums[l][i] * scale;
            Vector next = em_step(model, coarse[l], spec.eta_list[l], coarse_noise);
            if (!(norm(next) <= spec.blowup_bound))
              throw Divergence(static_cast<std::int64_t>(j + 1), norm(next), spec.blowup_bound);
            coarse[l].swap(next);
            sums[l].assign(d, 0.0);
            if (++taken[l] == coarse_steps[l]) {
              double e = 0.0;
              for (std::size_t i = 0; i < d; ++i) e += (fine[i] - coarse[l][i]) * (fine[i] - coarse[l][i]);
              err[rep * levels + l] = e;
            }
          }
        }
      } catch (const Divergence&) {
        diverged[rep] = 1;
      }
    }
  });

  StrongErrorTable table;
  table.eta_ref = eta_ref;
  for (unsigned char dv : diverged) table.diverged += dv;
  table.replicas_used = spec.replicas - table.diverged;
  if (static_cast<double>(table.diverged) > 0.01 * static_cast<double>(spec.replicas))
    throw ExperimentError("strong_error_mse: " + std::to_string(table.diverged) +
                          " divergent replicas exceed the 1% budget");

  std::vector<double> column;
  column.reserve(table.replicas_used);
  for (std::size_t l = 0; l < levels; ++l) {
    column.clear();
    for (std::size_t rep = 0; rep < spec.replicas; ++rep)
      if (!diverged[rep]) column.push_back(err[rep * levels + l]);
    const auto mom = stats::moments(column);
    table.rows.push_back({spec.eta_list[l], coarse_steps[l], mom.mean, mom.std_err});
  }

  std::vector<double> lx, ly;
  for (const auto& row : table.rows) {
    table.max_mse_over_eta = std::max(table.max_mse_over_eta, row.mse / row.eta);
    if (row.mse > 0.0) {
      lx.push_back(std::log(row.eta));
      ly.push_back(std::log(row.mse));
    }
  }
  std::vector<StrongErrorRow> by_eta = table.rows;
  std::sort(by_eta.begin(), by_eta.end(), [](const auto& a, const auto& b) { return a.eta > b.eta; });
  for (std::size_t i = 0; i < std::min<std::size_t>(2, by_eta.size()); ++i)
    table.bound_constant = std::max(table.bound_constant, by_eta[i].mse / by_eta[i].eta);
  bool distinct = false;
  for (std::size_t i = 1; i < lx.size(); ++i) distinct = distinct || lx[i] != lx[0];
  if (lx.size() >= 2 && distinct) table.slope = stats::least_squares(lx, ly).slope;
  return table;
}

}  // namespace emfluct
