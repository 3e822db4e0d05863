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

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "emfluct/error.hpp"
#include "emfluct/harness/config.hpp"
#include "emfluct/harness/manifest.hpp"
#include "emfluct/harness/registry.hpp"
#include "emfluct/harness/run.hpp"
#include "emfluct/harness/thread_pool.hpp"

namespace fs = std::filesystem;
using namespace emfluct;
using namespace emfluct::harness;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("emfluct_harness_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

ExperimentConfig small_clt(const fs::path& out, std::size_t n) {
  auto c = parse_config("experiment = clt\nn_replicas = " + std::to_string(n) + "\n");
  c.output_dir = out.string();
  return c;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(EMFLUCT_BIN) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, UnknownKeyIsRejectedByName) {
  try {
    parse_config("experiment = clt\netaa = 0.1\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("'etaa'"), std::string::npos);
    EXPECT_EQ(exit_code_for(e), kExitConfig);
  }
}

TEST(Config, RejectsDuplicatesMissingExperimentAndBadValues) {
  EXPECT_THROW(parse_config("experiment = clt\neta = 0.1\neta = 0.2\n"), ConfigError);
  EXPECT_THROW(parse_config("eta = 0.1\n"), ConfigError);
  EXPECT_THROW(parse_config("experiment = clt\neta = 1.5\n"), ConfigError);
  EXPECT_THROW(parse_config("experiment = clt\neta = abc\n"), ConfigError);
  EXPECT_THROW(parse_config("experiment = clt\nn_replicas = -3\n"), ConfigError);
  EXPECT_THROW(parse_config("experiment = nope\n"), ConfigError);
  EXPECT_THROW(parse_config("experiment = clt\njust a line\n"), ConfigError);
  EXPECT_THROW(parse_config("experiment = clt\ncheck.ks_stat.median = 1\n"), ConfigError);
  EXPECT_THROW(parse_config("experiment = clt\nx_grid = 2,1\n"), ConfigError);
}

TEST(Config, ParsesListsChecksAndComments) {
  const auto c = parse_config(
      "# header\nexperiment = tail_ratio  # trailing\neta_list = 0.2, 0.1\n"
      "x_grid = 0.5,1\nk_list = 100,400\ncheck.ratio@1.max = 1.1\ngrid = -1:0.5:1\n");
  EXPECT_EQ(c.experiment, ExperimentKind::tail_ratio);
  ASSERT_EQ(c.eta_list.size(), 2u);
  EXPECT_EQ(c.eta_list[1], 0.1);
  EXPECT_EQ(c.k_list, (std::vector<std::size_t>{100, 400}));
  ASSERT_TRUE(c.checks.count("ratio@1"));
  EXPECT_EQ(*c.checks.at("ratio@1").max, 1.1);
  EXPECT_FALSE(c.checks.at("ratio@1").min);
  EXPECT_EQ(c.grid_step, 0.5);
  EXPECT_EQ(c.snapshot.size(), 6u);
}

TEST(Registry, CapabilityErrorsForMissingSolutions) {
  auto c = parse_config("experiment = decompose\nobservable = tanh\n");
  EXPECT_THROW(build_bundle(c, 3), CapabilityError);
  EXPECT_NO_THROW(build_bundle(c, 2));
  c.model = "double_well";
  c.observable = "square";
  EXPECT_THROW(build_bundle(c, 1), CapabilityError);
  c.observable = "const";
  EXPECT_NO_THROW(build_bundle(c, 3));
}

// Oracle: E[x^2] = 1/2 and E[x] = 0 for OU with a = 1, sigma = 1.
TEST(Registry, StationaryExpectations) {
  auto c = parse_config("experiment = bias_curve\nobservable = square\n");
  EXPECT_DOUBLE_EQ(*stationary_expectation(c), 0.5);
  c.observable = "identity";
  EXPECT_EQ(*stationary_expectation(c), 0.0);
  c.model = "zero";
  EXPECT_FALSE(stationary_expectation(c));
  // Double well at sigma = 1: density exp(x^2 - x^4/2); mean of x^2 by an
  // independent trapezoid sum on a finer grid.
  c.model = "double_well";
  c.observable = "square";
  double num = 0.0, den = 0.0;
  for (int i = -80000; i <= 80000; ++i) {
    const double x = i * 1e-4;
    const double p = std::exp(x * x - 0.5 * x * x * x * x);
    num += x * x * p;
    den += p;
  }
  EXPECT_NEAR(*stationary_expectation(c), num / den, 1e-10);
}

TEST(ThreadPool, CoversEveryIndexOnce) {
  for (std::size_t threads : {1u, 3u, 16u}) {
    const ThreadPoolExecutor pool(threads);
    for (std::size_t n : {0u, 1u, 5u, 1000u}) {
      std::vector<std::atomic<int>> hits(n);
      pool.for_ranges(n, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) hits[i]++;
      });
      for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(hits[i].load(), 1);
    }
  }
}

TEST(ThreadPool, RethrowsLowestChunkError) {
  const ThreadPoolExecutor pool(8);
  try {
    pool.for_ranges(640, [](std::size_t b, std::size_t) {
      if (b >= 100) throw std::runtime_error("chunk " + std::to_string(b));
    });
    FAIL() << "expected an exception";
  } catch (const std::runtime_error& e) {
    // 64 chunks of 10 indices: the first failing chunk starts at 100.
    EXPECT_STREQ(e.what(), "chunk 100");
  }
  // The pool stays usable after a failed job.
  std::atomic<std::size_t> sum{0};
  pool.for_ranges(10, [&](std::size_t b, std::size_t e) { sum += e - b; });
  EXPECT_EQ(sum.load(), 10u);
}

TEST(Run, CltSmokeWritesArtifacts) {
  const auto dir = scratch("smoke");
  auto c = small_clt(dir, 10);
  c.checks["n_records"].min = 10;
  const auto man = run_experiment(c, ThreadPoolExecutor(2));
  EXPECT_EQ(man.experiment, "clt");
  EXPECT_TRUE(man.checks_pass());
  EXPECT_TRUE(fs::exists(dir / "manifest.json"));
  EXPECT_TRUE(fs::exists(dir / "ensemble.jsonl"));
  EXPECT_TRUE(fs::exists(dir / "summary.json"));
  ASSERT_NE(man.find("ks_stat"), nullptr);
  EXPECT_TRUE(man.find("ks_stat")->untrusted);
  std::ifstream in(dir / "ensemble.jsonl");
  std::size_t lines = 0;
  for (std::string l; std::getline(in, l);) ++lines;
  EXPECT_EQ(lines, 10u);
  EXPECT_TRUE(verify_manifest(dir / "manifest.json").ok);
}

TEST(Run, OutputsAreThreadCountInvariant) {
  const char* experiments[] = {"clt", "bias_curve", "concentration_stationary", "decompose"};
  for (const char* e : experiments) {
    std::vector<std::string> reference;
    for (std::size_t threads : {1u, 4u, 16u}) {
      const auto dir = scratch(std::string("threads_") + e + std::to_string(threads));
      auto c = parse_config(std::string("experiment = ") + e +
                            "\nn_replicas = 97\ncalibration_steps = 5000\nobservable = square\n");
      c.output_dir = dir.string();
      const auto man = run_experiment(c, ThreadPoolExecutor(threads));
      std::vector<std::string> hashes;
      for (const auto& o : man.outputs) hashes.push_back(o.path + ":" + o.sha256);
      if (reference.empty()) {
        reference = hashes;
      } else {
        EXPECT_EQ(hashes, reference) << e << " threads=" << threads;
      }
    }
  }
}

TEST(Run, SeedControlsOutputs) {
  auto a = small_clt(scratch("seed_a"), 50);
  auto b = small_clt(scratch("seed_b"), 50);
  auto d = small_clt(scratch("seed_d"), 50);
  d.master_seed = 2;
  run_experiment(a, serial_executor());
  run_experiment(b, serial_executor());
  run_experiment(d, serial_executor());
  const auto ea = slurp(fs::path(a.output_dir) / "ensemble.jsonl");
  EXPECT_EQ(ea, slurp(fs::path(b.output_dir) / "ensemble.jsonl"));
  EXPECT_NE(ea, slurp(fs::path(d.output_dir) / "ensemble.jsonl"));
}

TEST(Run, CapabilityFailsBeforeWritingOutputs) {
  const auto dir = scratch("capability");
  auto c = parse_config("experiment = decompose\nobservable = tanh\n");
  c.output_dir = dir.string();
  try {
    run_experiment(c, serial_executor());
    FAIL() << "expected CapabilityError";
  } catch (const CapabilityError& e) {
    EXPECT_EQ(exit_code_for(e), kExitCapability);
  }
  EXPECT_TRUE(fs::is_empty(dir));
}

TEST(Run, FailedCheckIsRecorded) {
  const auto dir = scratch("failcheck");
  auto c = small_clt(dir, 20);
  c.checks["n_records"].max = 5;
  c.checks["no_such_stat"].min = 0;
  const auto man = run_experiment(c, serial_executor());
  ASSERT_EQ(man.checks.size(), 2u);
  EXPECT_FALSE(man.checks_pass());
  for (const auto& chk : man.checks) EXPECT_FALSE(chk.pass);
}

TEST(Verify, DetectsDeletedAndAlteredFiles) {
  const auto dir = scratch("verify");
  run_experiment(small_clt(dir, 10), serial_executor());
  ASSERT_TRUE(verify_manifest(dir / "manifest.json").ok);
  {
    std::ofstream(dir / "summary.json", std::ios::app) << " ";
  }
  auto rep = verify_manifest(dir / "manifest.json");
  EXPECT_FALSE(rep.ok);
  fs::remove(dir / "ensemble.jsonl");
  rep = verify_manifest(dir / "manifest.json");
  EXPECT_FALSE(rep.ok);
  bool saw_missing = false;
  for (const auto& p : rep.problems) saw_missing |= p.find("missing output 'ensemble.jsonl'") != std::string::npos;
  EXPECT_TRUE(saw_missing);
}

TEST(Summary, PassLineAndEmptyManifest) {
  RunManifest m;
  m.statistics.push_back({"ks_stat", 0.01, false});
  m.statistics.push_back({"ratio@3", 1.2, true});
  m.checks.push_back({"ks_stat", std::nullopt, 0.02, 0.01, true});
  std::ostringstream out;
  emit_summary(m, out);
  const std::string s = out.str();
  EXPECT_NE(s.find("PASS ks_stat = 0.01 in [-inf, 0.02]"), std::string::npos);
  EXPECT_NE(s.find("untrusted"), std::string::npos);

  const auto dir = scratch("empty");
  std::ofstream(dir / "manifest.json") << "{}";
  std::ostringstream empty;
  emit_summary(read_manifest(dir / "manifest.json"), empty);
  const std::string e = empty.str();
  EXPECT_EQ(std::count(e.begin(), e.end(), '\n'), 1);
  EXPECT_EQ(e.rfind("statistic", 0), 0u);
}

TEST(Cli, ExitCodes) {
  const auto dir = scratch("cli");
  std::ofstream(dir / "bad.cfg") << "experiment = clt\netaa = 0.1\n";
  EXPECT_EQ(run_cli("run --config " + (dir / "bad.cfg").string()), kExitConfig);
  std::ofstream(dir / "cap.cfg") << "experiment = decompose\nobservable = tanh\noutput_dir = "
                                 << (dir / "cap").string() << "\n";
  EXPECT_EQ(run_cli("run --config " + (dir / "cap.cfg").string()), kExitCapability);
  std::ofstream(dir / "ok.cfg") << "experiment = clt\nn_replicas = 10\n";
  const auto out = (dir / "out").string();
  EXPECT_EQ(run_cli("run --config " + (dir / "ok.cfg").string() + " --seed 7 --threads 4 --out " + out),
            kExitOk);
  const auto man = read_manifest(dir / "out" / "manifest.json");
  EXPECT_EQ(man.master_seed, 7u);
  EXPECT_EQ(man.threads, 4u);
  EXPECT_EQ(run_cli("verify --manifest " + out + "/manifest.json"), kExitOk);
  fs::remove(dir / "out" / "ensemble.jsonl");
  EXPECT_EQ(run_cli("verify --manifest " + out + "/manifest.json"), kExitVerifyFailed);
  EXPECT_EQ(run_cli("run"), kExitConfig);
}
