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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace emfluct::harness {

inline constexpr const char* kArtifactVersion = "emfluct-artifact/1";
inline constexpr const char* kToolVersion = "emfluct 1.0.0";

struct OutputRecord {
  std::string path;  // relative to the manifest's directory
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct Statistic {
  std::string name;
  double value = 0.0;
  // Set when the point rests on too few events or on a low-trust solver.
  bool untrusted = false;
};

struct CheckResult {
  std::string statistic;
  std::optional<double> min;
  std::optional<double> max;
  std::optional<double> value;  // nullopt when the statistic was not produced
  bool pass = false;
};

struct RunManifest {
  std::string artifact_version = kArtifactVersion;
  std::string tool_version = kToolVersion;
  std::string experiment;
  std::vector<std::pair<std::string, std::string>> config;  // keys as given, then overrides
  std::string rng_algorithm;
  std::uint64_t master_seed = 0;
  std::size_t threads = 1;
  std::string started_at;
  std::string finished_at;
  std::vector<OutputRecord> outputs;
  std::size_t divergences = 0;
  std::vector<Statistic> statistics;
  std::vector<CheckResult> checks;
  std::vector<std::string> warnings;

  bool checks_pass() const;
  const Statistic* find(const std::string& name) const;
};

// Lowercase hex SHA-256 of the file contents.
std::string sha256_file(const std::filesystem::path& path);

void write_manifest(const RunManifest& manifest, const std::filesystem::path& path);
// Missing fields read as defaults, so "{}" is a valid, empty manifest.
RunManifest read_manifest(const std::filesystem::path& path);

// One header line, one line per statistic with its trust flag, one
// PASS/FAIL line per check.
void emit_summary(const RunManifest& manifest, std::ostream& out);

struct VerifyReport {
  bool ok = true;
  std::vector<std::string> problems;
};

// Recomputes every recorded checksum and size relative to the manifest.
VerifyReport verify_manifest(const std::filesystem::path& path);

}  // namespace emfluct::harness
