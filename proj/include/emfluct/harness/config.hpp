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
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace emfluct::harness {

enum class ExperimentKind {
  strong_error,
  bias_curve,
  stein_residual,
  decompose,
  clt,
  tail_ratio,
  concentration_g,
  concentration_stationary,
  remainder_tail,
};

const char* to_string(ExperimentKind kind) noexcept;

struct Threshold {
  std::optional<double> min;
  std::optional<double> max;
};

// Flat key = value settings. Every field has a documented default; see
// README for the key list and ranges.
struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::clt;
  std::string model = "ou";
  double model_a = 1.0;
  double model_sigma = 1.0;
  std::size_t model_dim = 1;
  std::string observable = "identity";
  double observable_value = 0.0;
  double eta = 0.1;
  std::vector<double> eta_list;  // experiment-specific default when empty
  std::size_t n_replicas = 1000;
  double burn_in_constant = 20.0;
  std::uint64_t master_seed = 1;
  std::string output_dir = "out";
  std::size_t threads = 1;
  std::vector<double> start;  // zeros when empty
  double horizon = 1.0;       // key "T"
  std::vector<double> x_grid;
  std::vector<std::size_t> k_list{100, 400};
  std::size_t calibration_steps = 2'000'000;
  int quad_order = 5;
  double grid_lo = -3.0, grid_step = 0.1, grid_hi = 3.0;  // key "grid" = lo:step:hi
  std::vector<double> phi_points;
  std::size_t phi_replicas = 10000;
  std::optional<double> phi_t_max;
  double phi_dt = 0.005;
  double x0 = 0.5;
  bool write_ensemble = true;
  std::map<std::string, Threshold> checks;  // key "check.<stat>.min|max"

  // Keys exactly as given, in file order, for the manifest snapshot.
  std::vector<std::pair<std::string, std::string>> snapshot;
};

// Throws ConfigError naming the offending key or line.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);

// Applies a single key = value override with the same validation.
void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value);

}  // namespace emfluct::harness
