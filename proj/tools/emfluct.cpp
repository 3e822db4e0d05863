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

// emfluct: run configured experiments and verify their artifacts.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "emfluct/error.hpp"
#include "emfluct/harness/config.hpp"
#include "emfluct/harness/manifest.hpp"
#include "emfluct/harness/run.hpp"

namespace h = emfluct::harness;

namespace {

int report(const std::exception& e) {
  const auto* err = dynamic_cast<const emfluct::Error*>(&e);
  std::cerr << "error[" << (err ? emfluct::to_string(err->category()) : "internal")
            << "]: " << e.what() << '\n';
  return h::exit_code_for(e);
}

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed,
            std::optional<std::size_t> threads, std::optional<std::string> out) {
  auto config = h::load_config(config_path);
  // Command-line overrides go through the same validation as file keys.
  if (seed) {
    h::apply_setting(config, "master_seed", std::to_string(*seed));
    config.snapshot.emplace_back("--seed", std::to_string(*seed));
  }
  if (threads) {
    h::apply_setting(config, "threads", std::to_string(*threads));
    config.snapshot.emplace_back("--threads", std::to_string(*threads));
  }
  if (out) {
    h::apply_setting(config, "output_dir", *out);
    config.snapshot.emplace_back("--out", *out);
  }
  const auto manifest = h::run_experiment(config);
  h::emit_summary(manifest, std::cout);
  for (const auto& w : manifest.warnings) std::cerr << "warning: " << w << '\n';
  return manifest.checks_pass() ? h::kExitOk : h::kExitChecksFailed;
}

int cmd_verify(const std::string& manifest_path) {
  const auto report = h::verify_manifest(manifest_path);
  const auto manifest = h::read_manifest(manifest_path);
  h::emit_summary(manifest, std::cout);
  for (const auto& p : report.problems) std::cerr << "verify: " << p << '\n';
  if (!report.ok) return h::kExitVerifyFailed;
  std::cout << "verify: " << manifest.outputs.size() << " outputs match\n";
  return manifest.checks_pass() ? h::kExitOk : h::kExitChecksFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Euler-Maruyama fluctuation experiments"};
  app.require_subcommand(1);

  std::string config_path, manifest_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::optional<std::string> out;

  auto* run = app.add_subcommand("run", "run the experiment described by a config file");
  run->add_option("--config", config_path, "config file (key = value)")->required();
  run->add_option("--seed", seed, "master seed override");
  run->add_option("--threads", threads, "worker thread override");
  run->add_option("--out", out, "output directory override");

  auto* verify = app.add_subcommand("verify", "check an artifact manifest against its files");
  verify->add_option("--manifest", manifest_path, "manifest.json path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : h::kExitConfig;
  }

  try {
    if (*run) return cmd_run(config_path, seed, threads, out);
    return cmd_verify(manifest_path);
  } catch (const std::exception& e) {
    return report(e);
  }
}
