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

#include "emfluct/harness/run.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <limits>
#include <sstream>

#include "emfluct/decomposition.hpp"
#include "emfluct/error.hpp"
#include "emfluct/ergodic.hpp"
#include "emfluct/moderate_deviation.hpp"
#include "emfluct/sde_core.hpp"
#include "emfluct/stein.hpp"
#include "emfluct/harness/registry.hpp"
#include "emfluct/harness/thread_pool.hpp"

namespace emfluct::harness {

namespace fs = std::filesystem;

namespace {

// Shortest text that round-trips to the same double.
std::string num(double x) {
  char buf[40];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

// JSON number; non-finite values become null.
std::string jnum(double x) { return std::isfinite(x) ? num(x) : "null"; }

// Short label for statistic names: "ratio@1.5".
std::string label(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class Run {
 public:
  Run(const ExperimentConfig& c, const Executor& ex, RunManifest& man)
      : c(c), ex(ex), man(man), dir(c.output_dir), stream(c.master_seed) {}

  const ExperimentConfig& c;
  const Executor& ex;
  RunManifest& man;
  fs::path dir;
  NoiseStream stream;

  std::ofstream open(const std::string& name) {
    std::ofstream out(dir / name);
    if (!out) throw ExperimentError("cannot create output '" + (dir / name).string() + "'");
    out.precision(17);
    files.push_back(name);
    return out;
  }

  void stat(const std::string& name, double value, bool untrusted = false) {
    man.statistics.push_back({name, value, untrusted});
  }

  void warn(const std::string& what) { man.warnings.push_back(what); }

  Vector start(std::size_t d) const {
    if (c.start.empty()) return Vector(d, 0.0);
    if (c.start.size() != d)
      throw ConfigError("config key 'start': expected " + std::to_string(d) + " coordinates");
    return c.start;
  }

  std::vector<double> etas(std::vector<double> fallback) const {
    return c.eta_list.empty() ? fallback : c.eta_list;
  }

  double require_pi(const char* experiment) const {
    const auto pi = stationary_expectation(c);
    if (!pi)
      throw CapabilityError(std::string(experiment) + ": pi(h) is unknown for " + c.model + "/" +
                            c.observable);
    return *pi;
  }

  std::vector<std::string> files;
};

void write_survival_rows(std::ofstream& out, const std::string& prefix,
                         const std::vector<stats::SurvivalRow>& rows) {
  for (const auto& r : rows)
    out << prefix << num(r.x) << ',' << num(r.survival) << ',' << num(r.ci.low) << ','
        << num(r.ci.high) << ',' << r.n_exceed << ',' << (r.trusted ? 1 : 0) << '\n';
}

void check_budget(std::size_t diverged, std::size_t n, const char* what) {
  if (static_cast<double>(diverged) > 0.01 * static_cast<double>(n))
    throw ExperimentError(std::string(what) + ": " + std::to_string(diverged) +
                          " divergent replicas exceed the 1% budget");
}

void run_strong_error(Run& run) {
  const auto& c = run.c;
  const SdeModel model = build_model(c);
  StrongErrorSpec spec;
  spec.T = c.horizon;
  spec.eta_list = run.etas({0.0625, 0.03125, 0.015625, 0.0078125, 0.00390625, 0.001953125});
  spec.replicas = c.n_replicas;
  spec.initial_state = run.start(model.dim());
  const auto table = strong_error_mse(model, spec, run.stream, run.ex);
  check_budget(table.diverged, c.n_replicas, "strong_error");
  run.man.divergences = table.diverged;
  auto out = run.open("strong_error.csv");
  out << "eta,steps,mse,std_err\n";
  for (const auto& r : table.rows)
    out << num(r.eta) << ',' << r.steps << ',' << num(r.mse) << ',' << num(r.std_err) << '\n';
  if (table.slope) {
    run.stat("slope", *table.slope);
  } else {
    run.warn("strong_error: no positive mse rows, slope undefined");
  }
  run.stat("max_mse_over_eta", table.max_mse_over_eta);
  run.stat("bound_constant", table.bound_constant);
  run.stat("eta_ref", table.eta_ref);
  run.stat("replicas_used", static_cast<double>(table.replicas_used));
}

void run_bias_curve(Run& run) {
  const auto& c = run.c;
  const SdeModel model = build_model(c);
  const Observable f = build_observable(c);
  const auto oracle = stationary_expectation(c);
  const auto etas = run.etas({0.2, 0.1, 0.05, 0.025});
  BiasOptions opts;
  opts.c_burn = c.burn_in_constant;
  opts.start = run.start(model.dim());
  const auto curve = invariant_bias_curve(model, f, etas, c.n_replicas, oracle, run.stream, opts, run.ex);
  const std::size_t runs = etas.size() + (oracle ? 0 : 1);
  check_budget(curve.diverged, runs * c.n_replicas, "bias_curve");
  run.man.divergences = curve.diverged;
  if (!oracle) run.warn("bias_curve: oracle estimated by a reference run");

  // pi_eta is Gaussian with closed-form moments for OU; compare against it.
  std::optional<double> (*exact)(const ExperimentConfig&, double) = nullptr;
  if (c.model == "ou" && (c.observable == "identity" || c.observable == "square"))
    exact = [](const ExperimentConfig& cc, double eta) -> std::optional<double> {
      if (cc.observable == "identity") return 0.0;
      const auto mom = ou_exact_moments({cc.model_a, cc.model_sigma, eta});
      return static_cast<double>(cc.model_dim) * mom.variance;
    };

  auto out = run.open("bias_curve.csv");
  out << "eta,estimate,std_err,oracle,bias_hat,ratio_to_sqrt_eta,inconclusive\n";
  double max_ratio = 0.0, max_z = 0.0;
  for (const auto& r : curve.rows) {
    out << num(r.eta) << ',' << num(r.estimate) << ',' << num(r.std_err) << ',' << num(r.oracle)
        << ',' << num(r.bias_hat) << ',' << num(r.ratio_to_sqrt_eta) << ',' << (r.inconclusive ? 1 : 0)
        << '\n';
    run.stat("bias@" + label(r.eta), r.bias_hat, r.inconclusive);
    run.stat("ratio@" + label(r.eta), r.ratio_to_sqrt_eta, r.inconclusive);
    max_ratio = std::max(max_ratio, r.ratio_to_sqrt_eta);
    if (exact) {
      const double target = *exact(c, r.eta);
      if (r.std_err > 0.0) max_z = std::max(max_z, std::abs(r.estimate - target) / r.std_err);
    }
  }
  run.stat("oracle", curve.oracle);
  run.stat("max_ratio_to_sqrt_eta", max_ratio);
  if (exact) run.stat("max_z_vs_exact_pi_eta", max_z);
}

// Grid points t * (1, ..., 1).
std::vector<Vector> diagonal_points(std::span<const double> ts, std::size_t d) {
  std::vector<Vector> pts;
  for (double t : ts) pts.emplace_back(d, t);
  return pts;
}

void run_stein_residual(Run& run) {
  const auto& c = run.c;
  const SdeModel model = build_model(c);
  const Observable h = build_observable(c);
  const double pi_h = run.require_pi("stein_residual");
  const SteinBundle bundle = build_bundle(c, 2);
  std::vector<double> ts;
  const auto count = static_cast<std::size_t>(std::floor((c.grid_hi - c.grid_lo) / c.grid_step + 1e-9));
  for (std::size_t i = 0; i <= count; ++i) ts.push_back(c.grid_lo + static_cast<double>(i) * c.grid_step);
  const auto grid = diagonal_points(ts, model.dim());
  const auto report = stein_residual(model, bundle, h, pi_h, grid);
  auto out = run.open("stein_residual.csv");
  out << "t,residual\n";
  for (std::size_t i = 0; i < ts.size(); ++i)
    out << num(ts[i]) << ',' << num(report.points[i].residual) << '\n';
  run.stat("max_residual", report.max_residual, bundle.low_trust_higher_order);
  if (bundle.provenance != Provenance::analytic)
    run.warn("stein_residual: bundle is " + std::string(to_string(bundle.provenance)));

  if (c.phi_points.empty()) return;
  PhiEstimateOptions opts;
  opts.replicas = c.phi_replicas;
  opts.dt = c.phi_dt;
  opts.t_max = c.phi_t_max ? *c.phi_t_max : default_t_max(model);
  auto js = run.open("phi_estimates.json");
  js << "[\n";
  double max_z = 0.0;
  bool any_warning = false;
  const auto pts = diagonal_points(c.phi_points, model.dim());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto est = estimate_phi(model, h, pi_h, pts[i], opts, run.stream, run.ex);
    const bool analytic = bundle.provenance == Provenance::analytic;
    const double exact = analytic ? bundle.phi(pts[i]) : std::numeric_limits<double>::quiet_NaN();
    js << "  {\"t\": " << jnum(c.phi_points[i]) << ", \"value\": " << jnum(est.value)
       << ", \"std_err\": " << jnum(est.std_err) << ", \"t_max\": " << jnum(est.t_max)
       << ", \"dt\": " << jnum(est.dt) << ", \"replicas\": " << est.replicas
       << ", \"tail_estimate\": " << jnum(est.tail_estimate)
       << ", \"truncation_warning\": " << (est.truncation_warning ? "true" : "false")
       << ", \"master_seed\": " << est.seed.master_seed
       << ", \"replica_index\": " << est.seed.replica_index << ", \"analytic\": " << jnum(exact)
       << "}" << (i + 1 < pts.size() ? "," : "") << '\n';
    any_warning = any_warning || est.truncation_warning;
    if (analytic && est.std_err > 0.0) max_z = std::max(max_z, std::abs(est.value - exact) / est.std_err);
  }
  js << "]\n";
  if (any_warning) run.warn("stein_residual: phi estimate hit the truncation warning");
  if (bundle.provenance == Provenance::analytic) run.stat("max_phi_z", max_z, any_warning);
}

void run_decompose(Run& run) {
  const auto& c = run.c;
  const SdeModel model = build_model(c);
  const Observable h = build_observable(c);
  const double pi_h = run.require_pi("decompose");
  const SteinBundle bundle = build_bundle(c, 3);
  if (!bundle.has_third())
    throw CapabilityError("decompose: Stein solution for " + c.model + "/" + c.observable +
                          " lacks a third derivative");
  const EmConfig cfg =
      EmConfig::standard(c.eta, run.start(model.dim()), default_burn_in(c.eta, c.burn_in_constant));
  DecompositionOptions opts;
  opts.quad_order = c.quad_order;
  std::vector<DecompositionReport> slots(c.n_replicas);
  std::vector<unsigned char> diverged(c.n_replicas, 0);
  run.ex.for_ranges(c.n_replicas, [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      try {
        const Trajectory traj = simulate_trajectory(model, cfg, run.stream.for_replica(r));
        slots[r] = decomposition_residual(traj, h, pi_h, bundle, model, opts);
      } catch (const Divergence&) {
        diverged[r] = 1;
      }
    }
  });
  std::size_t n_div = 0;
  for (auto d : diverged) n_div += d;
  check_budget(n_div, c.n_replicas, "decompose");
  run.man.divergences = n_div;

  auto out = run.open("decompose.jsonl");
  double max_abs = 0.0, max_rel = 0.0;
  std::vector<double> lhs, hp;
  for (std::size_t r = 0; r < c.n_replicas; ++r) {
    if (diverged[r]) {
      out << "{\"replica\": " << r << ", \"diverged\": true}\n";
      continue;
    }
    const auto& d = slots[r];
    out << "{\"replica\": " << r << ", \"lhs\": " << jnum(d.lhs) << ", \"h_part\": " << jnum(d.h_part);
    for (std::size_t i = 0; i < 6; ++i) out << ", \"r" << i + 1 << "\": " << jnum(d.r_parts[i]);
    out << ", \"r5_third\": " << jnum(d.r5_third) << ", \"remainder\": " << jnum(d.remainder)
        << ", \"residual\": " << jnum(d.residual) << ", \"quad_order\": " << d.quad_order
        << ", \"m\": " << d.m << "}\n";
    max_abs = std::max(max_abs, std::abs(d.residual));
    max_rel = std::max(max_rel, std::abs(d.residual) / std::max(1.0, std::abs(d.lhs)));
    lhs.push_back(d.lhs);
    hp.push_back(d.h_part);
  }
  run.stat("max_abs_residual", max_abs);
  run.stat("max_rel_residual", max_rel);
  if (lhs.size() >= 2) {
    const auto ml = stats::moments(lhs), mh = stats::moments(hp);
    run.stat("lhs_variance", ml.variance);
    run.stat("h_part_variance", mh.variance);
  }
}

void write_ensemble(Run& run, const EnsembleResult& ens) {
  auto out = run.open("ensemble.jsonl");
  std::size_t next = 0;
  std::size_t div = 0;
  for (std::uint64_t r = 0; r < ens.requested; ++r) {
    if (div < ens.diverged_replicas.size() && ens.diverged_replicas[div] == r) {
      out << "{\"replica\": " << r << ", \"diverged\": true}\n";
      ++div;
      continue;
    }
    const auto& rec = ens.records[next++];
    out << "{\"replica\": " << r << ", \"pi_eta_h\": " << jnum(rec.pi_eta_h)
        << ", \"y_eta\": " << jnum(rec.y_eta) << ", \"w_eta\": " << jnum(rec.w_eta)
        << ", \"master_seed\": " << rec.seed.master_seed << "}\n";
  }
}

EnsembleResult ensemble_for(Run& run, const SdeModel& model, const Observable& h, double pi_h,
                            const SteinBundle& bundle) {
  EnsembleOptions opts;
  opts.c_burn = run.c.burn_in_constant;
  opts.start = run.start(model.dim());
  auto ens = run_ensemble(model, h, pi_h, bundle, run.c.eta, run.c.n_replicas, run.stream, opts, run.ex);
  run.man.divergences = ens.diverged_replicas.size();
  if (run.c.write_ensemble) write_ensemble(run, ens);
  return ens;
}

void run_clt(Run& run) {
  const auto& c = run.c;
  const SdeModel model = build_model(c);
  const Observable h = build_observable(c);
  const double pi_h = run.require_pi("clt");
  const auto target = limiting_variance(c);
  if (!target)
    throw CapabilityError("clt: limiting variance unknown for " + c.model + "/" + c.observable);
  const SteinBundle bundle = build_bundle(c, 1);
  const auto ens = ensemble_for(run, model, h, pi_h, bundle);
  const auto chk = clt_check(ens, *target, 2);
  // The KS statistic is only meaningful for a few hundred records.
  const bool small = chk.n < 500;
  run.stat("ks_stat", chk.ks_stat, small);
  run.stat("variance_ratio", chk.variance_ratio, small);
  run.stat("sample_mean", chk.sample_mean, small);
  run.stat("sample_variance", chk.sample_variance, small);
  run.stat("target_variance", *target);
  run.stat("n_records", static_cast<double>(chk.n));
  run.stat("m", static_cast<double>(ens.m));
  run.stat("burn_in", static_cast<double>(ens.burn_in));
  if (small) run.warn("clt: fewer than 500 records");
}

void run_tail_ratio(Run& run) {
  const auto& c = run.c;
  const SdeModel model = build_model(c);
  const Observable h = build_observable(c);
  const double pi_h = run.require_pi("tail_ratio");
  const SteinBundle bundle = build_bundle(c, 1);
  const auto ens = ensemble_for(run, model, h, pi_h, bundle);
  const std::vector<double> grid =
      c.x_grid.empty() ? std::vector<double>{0.5, 1.0, 1.5, 2.0, 2.5, 3.0} : c.x_grid;
  const auto curve = tail_ratio_curve(ens, grid);
  auto out = run.open("tail_ratio.csv");
  out << "x,ratio,ci_low,ci_high,n_exceed,sf,trusted\n";
  for (std::size_t i = 0; i < curve.x_grid.size(); ++i) {
    out << num(curve.x_grid[i]) << ',' << num(curve.ratio[i]) << ',' << num(curve.ci_low[i]) << ','
        << num(curve.ci_high[i]) << ',' << curve.n_exceed[i] << ',' << num(curve.sf[i]) << ','
        << (curve.trusted[i] ? 1 : 0) << '\n';
    const std::string x = label(curve.x_grid[i]);
    const bool untrusted = !curve.trusted[i];
    run.stat("ratio@" + x, curve.ratio[i], untrusted);
    run.stat("ci_low@" + x, curve.ci_low[i], untrusted);
    run.stat("ci_high@" + x, curve.ci_high[i], untrusted);
  }
  run.stat("n_records", static_cast<double>(curve.n));
}

TailProbeOptions tail_options(const Run& run, std::size_t d) {
  TailProbeOptions t;
  t.c_burn = run.c.burn_in_constant;
  t.start = run.start(d);
  return t;
}

void run_concentration_g(Run& run) {
  const auto& c = run.c;
  const SdeModel model = build_model(c);
  const auto tab = concentration_g_probe(model, c.eta, default_chain_length(c.eta), c.n_replicas,
                                         c.x_grid, run.stream, tail_options(run, model.dim()), run.ex);
  run.man.divergences = tab.diverged;
  auto out = run.open("concentration_g.csv");
  out << "x,survival,ci_low,ci_high,n_exceed,trusted\n";
  write_survival_rows(out, "", tab.rows);
  // Fewer than three trusted rows above fit_from leave the fit meaningless.
  const bool thin = tab.fit.n < 3;
  run.stat("slope", tab.fit.slope, thin);
  run.stat("intercept", tab.fit.intercept, thin);
  run.stat("r_squared", tab.fit.r_squared, thin);
  run.stat("fit_points", static_cast<double>(tab.fit.n));
  run.stat("fit_from", tab.fit_from);
  run.stat("mean", tab.sample.mean);
  run.stat("std_err", tab.sample.std_err);
}

void run_concentration_stationary(Run& run) {
  const auto& c = run.c;
  const SdeModel model = build_model(c);
  const SteinBundle bundle = build_bundle(c, 1);
  StationarySumOptions opts;
  opts.tail = tail_options(run, model.dim());
  opts.calibration_steps = c.calibration_steps;
  auto out = run.open("concentration_stationary.csv");
  out << "k,y,survival,ci_low,ci_high,n_exceed,trusted\n";
  for (std::size_t k : c.k_list) {
    const auto res = stationary_sum_concentration(model, bundle, c.eta, k, c.n_replicas, c.x_grid,
                                                  run.stream, opts, run.ex);
    // Later k reuse the first calibration.
    if (!opts.mu) {
      opts.mu = res.mu_hat;
      run.stat("mu_hat", res.mu_hat);
    }
    run.man.divergences += res.table.diverged;
    write_survival_rows(out, std::to_string(k) + ",", res.table.rows);
    const std::string tag = "@k" + std::to_string(k);
    const bool thin = res.table.fit.n < 3;
    run.stat("slope" + tag, res.table.fit.slope, thin);
    run.stat("r_squared" + tag, res.table.fit.r_squared, thin);
    run.stat("fit_points" + tag, static_cast<double>(res.table.fit.n));
  }
}

void run_remainder_tail(Run& run) {
  const auto& c = run.c;
  const SdeModel model = build_model(c);
  const Observable h = build_observable(c);
  const double pi_h = run.require_pi("remainder_tail");
  const SteinBundle bundle = build_bundle(c, 3);
  RemainderProbeOptions opts;
  opts.tail = tail_options(run, model.dim());
  opts.quad_order = c.quad_order;
  opts.x0 = c.x0;
  const auto etas = run.etas({0.2, 0.1, 0.05});
  const auto res = remainder_tail_probe(model, h, pi_h, bundle, etas, c.n_replicas, run.stream, opts, run.ex);
  auto out = run.open("remainder_tail.csv");
  out << "eta,x,survival,ci_low,ci_high,n_exceed,trusted\n";
  bool median_decreasing = true, p_nonincreasing = true;
  for (std::size_t i = 0; i < res.size(); ++i) {
    const auto& t = res[i];
    run.man.divergences += t.diverged;
    write_survival_rows(out, num(t.eta) + ",", t.rows);
    const std::string e = "@" + label(t.eta);
    run.stat("median" + e, t.median_abs);
    run.stat("q99" + e, t.q99_abs);
    run.stat("p_x0" + e, t.at_x0.survival, !t.at_x0.trusted);
    if (i > 0 && t.eta < res[i - 1].eta) {
      median_decreasing = median_decreasing && t.median_abs < res[i - 1].median_abs;
      p_nonincreasing = p_nonincreasing && t.at_x0.survival <= res[i - 1].at_x0.survival;
    }
  }
  run.stat("median_decreasing", median_decreasing ? 1.0 : 0.0);
  run.stat("p_x0_nonincreasing", p_nonincreasing ? 1.0 : 0.0);
}

void evaluate_checks(const ExperimentConfig& c, RunManifest& man) {
  for (const auto& [name, th] : c.checks) {
    CheckResult r;
    r.statistic = name;
    r.min = th.min;
    r.max = th.max;
    if (const Statistic* s = man.find(name)) {
      r.value = s->value;
      r.pass = std::isfinite(s->value) && (!th.min || s->value >= *th.min) &&
               (!th.max || s->value <= *th.max);
    }
    man.checks.push_back(r);
  }
}

void write_summary(Run& run) {
  auto out = run.open("summary.json");
  const auto& m = run.man;
  out << "{\n  \"experiment\": \"" << m.experiment << "\",\n  \"divergences\": " << m.divergences
      << ",\n  \"statistics\": {";
  for (std::size_t i = 0; i < m.statistics.size(); ++i)
    out << (i ? "," : "") << "\n    \"" << m.statistics[i].name << "\": " << jnum(m.statistics[i].value);
  out << "\n  },\n  \"untrusted\": [";
  bool first = true;
  for (const auto& s : m.statistics)
    if (s.untrusted) {
      out << (first ? "" : ", ") << '"' << s.name << '"';
      first = false;
    }
  out << "],\n  \"checks\": [";
  for (std::size_t i = 0; i < m.checks.size(); ++i)
    out << (i ? ", " : "") << "{\"statistic\": \"" << m.checks[i].statistic
        << "\", \"pass\": " << (m.checks[i].pass ? "true" : "false") << '}';
  out << "]\n}\n";
}

}  // namespace

int exit_code_for(const std::exception& error) noexcept {
  const auto* e = dynamic_cast<const Error*>(&error);
  if (!e) return kExitInternal;
  switch (e->category()) {
    case ErrorCategory::configuration: return kExitConfig;
    case ErrorCategory::capability: return kExitCapability;
    case ErrorCategory::experiment:
    case ErrorCategory::divergence:
    case ErrorCategory::mismatched_bundle: return kExitExperiment;
    default: return kExitInternal;
  }
}

RunManifest run_experiment(const ExperimentConfig& config, const Executor& executor) {
  RunManifest man;
  man.experiment = to_string(config.experiment);
  man.config = config.snapshot;
  man.master_seed = config.master_seed;
  man.threads = executor.concurrency();
  man.rng_algorithm = std::string(NoiseStream(config.master_seed).algorithm_tag());
  man.started_at = utc_now();

  std::error_code ec;
  fs::create_directories(config.output_dir, ec);
  if (ec) throw ConfigError("config key 'output_dir': cannot create '" + config.output_dir + "'");

  Run run(config, executor, man);
  switch (config.experiment) {
    case ExperimentKind::strong_error: run_strong_error(run); break;
    case ExperimentKind::bias_curve: run_bias_curve(run); break;
    case ExperimentKind::stein_residual: run_stein_residual(run); break;
    case ExperimentKind::decompose: run_decompose(run); break;
    case ExperimentKind::clt: run_clt(run); break;
    case ExperimentKind::tail_ratio: run_tail_ratio(run); break;
    case ExperimentKind::concentration_g: run_concentration_g(run); break;
    case ExperimentKind::concentration_stationary: run_concentration_stationary(run); break;
    case ExperimentKind::remainder_tail: run_remainder_tail(run); break;
  }
  evaluate_checks(config, man);
  write_summary(run);
  man.finished_at = utc_now();
  for (const auto& name : run.files) {
    const fs::path p = run.dir / name;
    man.outputs.push_back({name, sha256_file(p), fs::file_size(p)});
  }
  write_manifest(man, run.dir / "manifest.json");
  return man;
}

RunManifest run_experiment(const ExperimentConfig& config) {
  const ThreadPoolExecutor pool(config.threads);
  return run_experiment(config, pool);
}

}  // namespace emfluct::harness
