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

#include "emfluct/harness/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "emfluct/error.hpp"

namespace emfluct::harness {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad(const std::string& key, const std::string& why) {
  throw ConfigError("config key '" + key + "': " + why);
}

double parse_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  const auto r = std::from_chars(v.data(), end, out);
  if (r.ec != std::errc() || r.ptr != end || !std::isfinite(out))
    bad(key, "expected a finite number, got '" + v + "'");
  return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto* end = v.data() + v.size();
  const auto r = std::from_chars(v.data(), end, out);
  if (r.ec != std::errc() || r.ptr != end) bad(key, "expected a non-negative integer, got '" + v + "'");
  return out;
}

std::vector<std::string> split(const std::string& v, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(v);
  while (std::getline(in, cur, sep)) parts.push_back(trim(cur));
  return parts;
}

std::vector<double> parse_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  if (trim(v).empty()) return out;
  for (const auto& p : split(v, ',')) out.push_back(parse_double(key, p));
  return out;
}

double positive(const std::string& key, double v) {
  if (!(v > 0.0)) bad(key, "must be positive");
  return v;
}

double step_size(const std::string& key, double v) {
  if (!(v > 0.0 && v < 1.0)) bad(key, "step size must lie in (0, 1)");
  return v;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad(key, "expected true or false");
}

ExperimentKind parse_experiment(const std::string& v) {
  static const std::pair<const char*, ExperimentKind> table[] = {
      {"strong_error", ExperimentKind::strong_error},
      {"bias_curve", ExperimentKind::bias_curve},
      {"stein_residual", ExperimentKind::stein_residual},
      {"decompose", ExperimentKind::decompose},
      {"clt", ExperimentKind::clt},
      {"tail_ratio", ExperimentKind::tail_ratio},
      {"concentration_g", ExperimentKind::concentration_g},
      {"concentration_stationary", ExperimentKind::concentration_stationary},
      {"remainder_tail", ExperimentKind::remainder_tail},
  };
  for (const auto& [name, kind] : table)
    if (v == name) return kind;
  bad("experiment", "unknown experiment '" + v + "'");
}

}  // namespace

const char* to_string(ExperimentKind kind) noexcept {
  switch (kind) {
    case ExperimentKind::strong_error: return "strong_error";
    case ExperimentKind::bias_curve: return "bias_curve";
    case ExperimentKind::stein_residual: return "stein_residual";
    case ExperimentKind::decompose: return "decompose";
    case ExperimentKind::clt: return "clt";
    case ExperimentKind::tail_ratio: return "tail_ratio";
    case ExperimentKind::concentration_g: return "concentration_g";
    case ExperimentKind::concentration_stationary: return "concentration_stationary";
    case ExperimentKind::remainder_tail: return "remainder_tail";
  }
  return "unknown";
}

void apply_setting(ExperimentConfig& c, const std::string& key, const std::string& value) {
  const std::string& v = value;
  if (key == "experiment") {
    c.experiment = parse_experiment(v);
  } else if (key == "model") {
    if (v != "ou" && v != "double_well" && v != "zero") bad(key, "unknown model '" + v + "'");
    c.model = v;
  } else if (key == "model.a") {
    c.model_a = positive(key, parse_double(key, v));
  } else if (key == "model.sigma") {
    c.model_sigma = positive(key, parse_double(key, v));
  } else if (key == "model.dim") {
    c.model_dim = parse_u64(key, v);
    if (c.model_dim < 1 || c.model_dim > 64) bad(key, "must lie in [1, 64]");
  } else if (key == "observable") {
    if (v != "identity" && v != "square" && v != "tanh" && v != "const")
      bad(key, "unknown observable '" + v + "'");
    c.observable = v;
  } else if (key == "observable.value") {
    c.observable_value = parse_double(key, v);
  } else if (key == "eta") {
    c.eta = step_size(key, parse_double(key, v));
  } else if (key == "eta_list") {
    c.eta_list = parse_list(key, v);
    if (c.eta_list.empty()) bad(key, "must not be empty");
    for (double e : c.eta_list) step_size(key, e);
  } else if (key == "n_replicas") {
    c.n_replicas = parse_u64(key, v);
    if (c.n_replicas < 1) bad(key, "must be at least 1");
  } else if (key == "burn_in_constant") {
    c.burn_in_constant = parse_double(key, v);
    if (c.burn_in_constant < 0.0) bad(key, "must be non-negative");
  } else if (key == "master_seed") {
    c.master_seed = parse_u64(key, v);
  } else if (key == "output_dir") {
    if (v.empty()) bad(key, "must not be empty");
    c.output_dir = v;
  } else if (key == "threads") {
    c.threads = parse_u64(key, v);
    if (c.threads < 1 || c.threads > 1024) bad(key, "must lie in [1, 1024]");
  } else if (key == "start") {
    c.start = parse_list(key, v);
  } else if (key == "T") {
    c.horizon = positive(key, parse_double(key, v));
  } else if (key == "x_grid") {
    c.x_grid = parse_list(key, v);
    if (!std::is_sorted(c.x_grid.begin(), c.x_grid.end())) bad(key, "must be increasing");
  } else if (key == "k_list") {
    c.k_list.clear();
    for (const auto& p : split(v, ',')) {
      const auto k = parse_u64(key, p);
      if (k < 1) bad(key, "entries must be at least 1");
      c.k_list.push_back(k);
    }
    if (c.k_list.empty()) bad(key, "must not be empty");
  } else if (key == "calibration_steps") {
    c.calibration_steps = parse_u64(key, v);
    if (c.calibration_steps < 1) bad(key, "must be at least 1");
  } else if (key == "quad_order") {
    const auto q = parse_u64(key, v);
    if (q < 1 || q > 64) bad(key, "must lie in [1, 64]");
    c.quad_order = static_cast<int>(q);
  } else if (key == "grid") {
    const auto parts = split(v, ':');
    if (parts.size() != 3) bad(key, "expected lo:step:hi");
    c.grid_lo = parse_double(key, parts[0]);
    c.grid_step = positive(key, parse_double(key, parts[1]));
    c.grid_hi = parse_double(key, parts[2]);
    if (c.grid_hi < c.grid_lo) bad(key, "hi must not be below lo");
  } else if (key == "phi_points") {
    c.phi_points = parse_list(key, v);
  } else if (key == "phi_replicas") {
    c.phi_replicas = parse_u64(key, v);
    if (c.phi_replicas < 1) bad(key, "must be at least 1");
  } else if (key == "phi_t_max") {
    c.phi_t_max = positive(key, parse_double(key, v));
  } else if (key == "phi_dt") {
    c.phi_dt = step_size(key, parse_double(key, v));
  } else if (key == "x0") {
    c.x0 = parse_double(key, v);
  } else if (key == "write_ensemble") {
    c.write_ensemble = parse_bool(key, v);
  } else if (key.rfind("check.", 0) == 0) {
    const auto dot = key.rfind('.');
    const std::string stat = key.substr(6, dot == std::string::npos || dot < 6 ? 0 : dot - 6);
    const std::string bound = dot == std::string::npos ? "" : key.substr(dot + 1);
    if (stat.empty() || (bound != "min" && bound != "max"))
      throw ConfigError("unknown config key '" + key + "' (expected check.<stat>.min or .max)");
    const double x = parse_double(key, v);
    (bound == "min" ? c.checks[stat].min : c.checks[stat].max) = x;
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig c;
  bool saw_experiment = false;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> seen;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(std::string_view(t).substr(0, eq));
    const std::string value = trim(std::string_view(t).substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    if (std::find(seen.begin(), seen.end(), key) != seen.end())
      throw ConfigError("config key '" + key + "' given twice");
    seen.push_back(key);
    apply_setting(c, key, value);
    if (key == "experiment") saw_experiment = true;
    c.snapshot.emplace_back(key, value);
  }
  if (!saw_experiment) throw ConfigError("config key 'experiment' is required");
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace emfluct::harness
