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

#include "emfluct/harness/manifest.hpp"

#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <ostream>

#include <json.hpp>

#include "emfluct/error.hpp"

namespace emfluct::harness {

namespace {

using json = nlohmann::ordered_json;

std::string fmt17(double x) {
  char buf[40];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

json number_or_null(std::optional<double> x) {
  return x && std::isfinite(*x) ? json(*x) : json(nullptr);
}

std::optional<double> read_optional(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

}  // namespace

bool RunManifest::checks_pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

const Statistic* RunManifest::find(const std::string& name) const {
  for (const auto& s : statistics)
    if (s.name == name) return &s;
  return nullptr;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ExperimentError("cannot read '" + path.string() + "' for checksumming");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
    throw ExperimentError("sha256: digest initialisation failed");
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md;
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 15]);
  }
  return out;
}

void write_manifest(const RunManifest& m, const std::filesystem::path& path) {
  json j;
  j["artifact_version"] = m.artifact_version;
  j["tool_version"] = m.tool_version;
  j["experiment"] = m.experiment;
  json config = json::array();
  for (const auto& [k, v] : m.config) config.push_back({{"key", k}, {"value", v}});
  j["config"] = config;
  j["rng_algorithm"] = m.rng_algorithm;
  j["master_seed"] = m.master_seed;
  j["threads"] = m.threads;
  j["started_at"] = m.started_at;
  j["finished_at"] = m.finished_at;
  json outputs = json::array();
  for (const auto& o : m.outputs)
    outputs.push_back({{"path", o.path}, {"sha256", o.sha256}, {"bytes", o.bytes}});
  j["outputs"] = outputs;
  j["divergences"] = m.divergences;
  json stats = json::array();
  for (const auto& s : m.statistics)
    stats.push_back({{"name", s.name}, {"value", number_or_null(s.value)}, {"untrusted", s.untrusted}});
  j["statistics"] = stats;
  json checks = json::array();
  for (const auto& c : m.checks)
    checks.push_back({{"statistic", c.statistic},
                      {"min", number_or_null(c.min)},
                      {"max", number_or_null(c.max)},
                      {"value", number_or_null(c.value)},
                      {"pass", c.pass}});
  j["checks"] = checks;
  j["warnings"] = m.warnings;
  std::ofstream out(path);
  if (!out) throw ExperimentError("cannot write manifest '" + path.string() + "'");
  out << j.dump(2) << '\n';
  if (!out) throw ExperimentError("write failed for manifest '" + path.string() + "'");
}

RunManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read manifest '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("manifest '" + path.string() + "' is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw ConfigError("manifest '" + path.string() + "' must be a JSON object");
  RunManifest m;
  m.artifact_version = j.value("artifact_version", "");
  m.tool_version = j.value("tool_version", "");
  m.experiment = j.value("experiment", "");
  m.rng_algorithm = j.value("rng_algorithm", "");
  m.master_seed = j.value("master_seed", std::uint64_t{0});
  m.threads = j.value("threads", std::size_t{1});
  m.started_at = j.value("started_at", "");
  m.finished_at = j.value("finished_at", "");
  m.divergences = j.value("divergences", std::size_t{0});
  try {
    for (const auto& c : j.value("config", json::array()))
      m.config.emplace_back(c.at("key").get<std::string>(), c.at("value").get<std::string>());
    for (const auto& o : j.value("outputs", json::array()))
      m.outputs.push_back({o.at("path").get<std::string>(), o.at("sha256").get<std::string>(),
                           o.at("bytes").get<std::uintmax_t>()});
    for (const auto& s : j.value("statistics", json::array()))
      m.statistics.push_back({s.at("name").get<std::string>(),
                              read_optional(s, "value").value_or(std::nan("")),
                              s.value("untrusted", false)});
    for (const auto& c : j.value("checks", json::array()))
      m.checks.push_back({c.at("statistic").get<std::string>(), read_optional(c, "min"),
                          read_optional(c, "max"), read_optional(c, "value"),
                          c.value("pass", false)});
    for (const auto& w : j.value("warnings", json::array())) m.warnings.push_back(w.get<std::string>());
  } catch (const json::exception& e) {
    throw ConfigError("manifest '" + path.string() + "' is malformed: " + e.what());
  }
  return m;
}

void emit_summary(const RunManifest& m, std::ostream& out) {
  char line[256];
  std::snprintf(line, sizeof line, "%-32s %-24s %s\n", "statistic", "value", "flag");
  out << line;
  for (const auto& s : m.statistics) {
    std::snprintf(line, sizeof line, "%-32s %-24s %s\n", s.name.c_str(), fmt17(s.value).c_str(),
                  s.untrusted ? "untrusted" : "");
    out << line;
  }
  for (const auto& c : m.checks) {
    const std::string lo = c.min ? fmt17(*c.min) : "-inf";
    const std::string hi = c.max ? fmt17(*c.max) : "inf";
    const std::string v = c.value ? fmt17(*c.value) : "missing";
    out << (c.pass ? "PASS " : "FAIL ") << c.statistic << " = " << v << " in [" << lo << ", "
        << hi << "]\n";
  }
}

VerifyReport verify_manifest(const std::filesystem::path& path) {
  const RunManifest m = read_manifest(path);
  const auto dir = path.parent_path();
  VerifyReport report;
  auto problem = [&](std::string what) {
    report.ok = false;
    report.problems.push_back(std::move(what));
  };
  if (m.artifact_version != kArtifactVersion)
    problem("unsupported artifact_version '" + m.artifact_version + "'");
  for (const auto& o : m.outputs) {
    const auto file = dir / o.path;
    std::error_code ec;
    if (!std::filesystem::is_regular_file(file, ec)) {
      problem("missing output '" + o.path + "'");
      continue;
    }
    const auto bytes = std::filesystem::file_size(file, ec);
    if (ec || bytes != o.bytes) problem("size mismatch for '" + o.path + "'");
    if (sha256_file(file) != o.sha256) problem("checksum mismatch for '" + o.path + "'");
  }
  return report;
}

}  // namespace emfluct::harness
