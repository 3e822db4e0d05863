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

#include <exception>
#include <filesystem>

#include "emfluct/executor.hpp"
#include "emfluct/harness/config.hpp"
#include "emfluct/harness/manifest.hpp"

namespace emfluct::harness {

// Process exit codes of the CLI.
enum ExitCode : int {
  kExitOk = 0,
  kExitChecksFailed = 1,
  kExitConfig = 2,
  kExitExperiment = 3,  // divergence budget exceeded or a mismatched bundle
  kExitCapability = 4,
  kExitInternal = 5,
  kExitVerifyFailed = 6,
};

int exit_code_for(const std::exception& error) noexcept;

// Runs the configured experiment on `executor`, writes its outputs, a
// summary.json and manifest.json into config.output_dir, and returns the
// manifest. Capability and configuration errors are raised before any
// simulation starts.
RunManifest run_experiment(const ExperimentConfig& config, const Executor& executor);

// As above with a ThreadPoolExecutor of config.threads workers.
RunManifest run_experiment(const ExperimentConfig& config);

}  // namespace emfluct::harness
