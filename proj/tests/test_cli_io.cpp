// Copyright 2026 The seuscrub Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "seuscrub/cli.hpp"
#include "seuscrub/serialization.hpp"

using namespace seuscrub;
using namespace seuscrub::cli;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    static int n = 0;
    path_ = fs::temp_directory_path() /
            ("seuscrub_cli_" + std::to_string(::getpid()) + "_" + std::to_string(n++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void put(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

int run_cli(std::vector<std::string> args, std::string* out_text = nullptr,
            std::string* err_text = nullptr) {
  args.insert(args.begin(), "seuscrub");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int rc = main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str();
  if (err_text) *err_text = err.str();
  return rc;
}

const char* kSmall = R"(experiments: 4
workers: 2
policies: [none, "blind_full:100"]
experiment:
  duration: 6000
  workload: {half_period: 1500}
)";

campaign::CampaignConfig varied(std::uint64_t seed) {
  std::mt19937_64 g(seed);
  campaign::CampaignConfig c;
  c.root_seed = g();
  c.experiments = 1 + g() % 50;
  c.workers = static_cast<unsigned>(g() % 8);
  c.output = "out_" + std::to_string(g() % 100);
  c.policies = {scrub::PolicySpec::parse("none"), scrub::PolicySpec::parse("budgeted:10:3"),
                scrub::PolicySpec::parse("blind_partial:50:8-20")};
  c.write_logs = g() % 2;
  auto& e = c.experiment;
  e.root_seed = c.root_seed;
  e.duration = 1000 + 100 * static_cast<Tick>(g() % 500);
  e.workload.low = Q16::from_double(10.0 + (g() % 100) / 7.0);
  e.workload.half_period = 500;
  e.controller.ki = Q16::from_double(1.0 / 3.0);
  e.plant.a = dut::Coeff30::from_double(0.9 + (g() % 90) / 1000.0);
  e.faults.base_rate = 1e-7 * static_cast<double>(1 + g() % 1000);
  e.faults.weights = {20, 1, 1};
  if (seed % 2) {
    e.faults.mode = campaign::FaultMode::Explicit;
    e.faults.events = {{5, fault::FaultKind::Mbe, {9, 9}, 2}, {7, fault::FaultKind::Sbe, {12, 0}, 0}};
  } else {
    e.faults.mode = campaign::FaultMode::Poisson;
  }
  e.map.params.unused = 0.25;
  e.map.params.non_sensitive = 0.6;
  e.map.params.sensitive = 0.15;
  e.map.overrides = {{{10, 11}, "KI_BIT(4)", 7}, {{10, 12}, "UNUSED", std::nullopt}};
  e.environment.profile = {env::ProfileKind::Episodic, {{100, 900, 4.5}}};
  e.environment.params.temp_noise = 0.123456789;
  e.fpscrub.theta_low = 0.75;
  e.fpscrub.io_bounds.reset();
  e.compute_fraction = 0.3;
  e.latency_threshold = 250;
  e.root_cause = g() % 2;
  return c;
}

}  // namespace

TEST(ConfigFile, EmitParseRoundTrip) {
  for (std::uint64_t s = 0; s < 25; ++s) {
    const auto c = varied(s);
    EXPECT_EQ(parse_campaign(emit_campaign_yaml(c, false)), c) << s;
    EXPECT_EQ(parse_campaign(emit_campaign_yaml(c, true)), c) << s;
  }
  const campaign::CampaignConfig d;
  EXPECT_EQ(parse_campaign(emit_campaign_yaml(d, true)), d);
  EXPECT_EQ(parse_campaign(""), d);
}

TEST(ConfigFile, JsonRoundTrip) {
  const auto c = varied(4);
  EXPECT_EQ(io::campaign_from_json(io::to_json(c)), c);
  auto e = c.experiment_at(c.policies[1], 2);
  EXPECT_EQ(io::experiment_from_json(io::to_json(e)), e);
}

TEST(ConfigFile, StrictSchema) {
  try {
    parse_campaign("experiment:\n  durration: 5\n");
    FAIL();
  } catch (const io::ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("durration"), std::string::npos);
  }
  EXPECT_THROW(parse_campaign("experiments: many\n"), io::ConfigError);
  EXPECT_THROW(parse_campaign("experiment:\n  duration: 1.5\n"), io::ConfigError);
  EXPECT_THROW(parse_campaign("policies: [\"warp:9\"]\n"), std::invalid_argument);
  EXPECT_THROW(parse_campaign("experiments: 3\nexperiments: 4\n"), io::ConfigError);
  EXPECT_THROW(parse_campaign("experiment: [1, 2\n"), io::ConfigError);
}

TEST(ConfigFile, FingerprintIgnoresPlumbing) {
  auto a = varied(1);
  auto b = a;
  b.workers = a.workers + 3;
  b.output = "elsewhere";
  b.write_logs = !a.write_logs;
  EXPECT_EQ(io::fingerprint(a), io::fingerprint(b));
  b.experiment.duration += 1;
  EXPECT_NE(io::fingerprint(a), io::fingerprint(b));
  EXPECT_EQ(io::parse_hex64(io::hex64(0x00ab)), 0xabu);
}

TEST(Records, JsonRoundTrip) {
  campaign::CampaignConfig c;
  c.experiments = 6;
  c.workers = 1;
  const auto r = campaign::run_campaign(c);
  for (const auto& rec : r.records[0]) {
    const auto back = io::record_from_json(io::to_json(rec));
    EXPECT_EQ(back, rec);
    EXPECT_EQ(io::to_json(back).dump(), io::to_json(rec).dump());
  }
}

TEST(Run, MinimalConfigWritesRecordsAndAggregate) {
  TempDir tmp;
  put(tmp.path() / "c.yaml", kSmall);
  const auto out = tmp.path() / "res";
  std::string o, e;
  ASSERT_EQ(run_cli({"run", (tmp.path() / "c.yaml").string(), "--out", out.string()}, &o, &e), 0)
      << e;
  EXPECT_TRUE(fs::exists(out / "aggregate.csv"));
  EXPECT_TRUE(fs::exists(out / "effective_config.yaml"));
  for (const std::string slug : {"none", "blind_full_100"}) {
    int n = 0;
    for (const auto& f : fs::directory_iterator(out / "records" / slug)) n += f.path().extension() == ".json";
    EXPECT_EQ(n, 4) << slug;
  }
  const auto agg = slurp(out / "aggregate.csv");
  EXPECT_EQ(agg.rfind("# root_seed=1 fingerprint=", 0), 0u);
  EXPECT_NE(agg.find("\npolicy,index,seed,fingerprint,outcome"), std::string::npos);

  // the echoed config reproduces the run
  const auto echoed = load_campaign(out / "effective_config.yaml");
  EXPECT_EQ(echoed.experiment.duration, 6000);
  EXPECT_EQ(echoed.output, out.string());
}

TEST(Run, SameConfigTwiceIsByteIdentical) {
  TempDir tmp;
  put(tmp.path() / "c.yaml", kSmall);
  ASSERT_EQ(run_cli({"run", (tmp.path() / "c.yaml").string(), "--out", (tmp.path() / "a").string(),
                     "--workers", "1"}),
            0);
  ASSERT_EQ(run_cli({"run", (tmp.path() / "c.yaml").string(), "--out", (tmp.path() / "b").string(),
                     "--workers", "3"}),
            0);
  EXPECT_EQ(slurp(tmp.path() / "a" / "aggregate.csv"), slurp(tmp.path() / "b" / "aggregate.csv"));
}

TEST(Run, OverridesApply) {
  TempDir tmp;
  put(tmp.path() / "c.yaml", kSmall);
  const auto out = tmp.path() / "res";
  ASSERT_EQ(run_cli({"run", (tmp.path() / "c.yaml").string(), "--out", out.string(), "--seed", "42",
                     "--policy", "readback:50", "--policy", "fpscrub", "--profile", "harsh", "-n",
                     "2"}),
            0);
  const auto eff = load_campaign(out / "effective_config.yaml");
  EXPECT_EQ(eff.root_seed, 42u);
  EXPECT_EQ(eff.experiments, 2u);
  ASSERT_EQ(eff.policies.size(), 2u);
  EXPECT_EQ(eff.policies[1].label(), "fpscrub");
  EXPECT_EQ(eff.experiment.environment.profile.kind, env::ProfileKind::Harsh);
  EXPECT_TRUE(fs::exists(out / "records" / "readback_50" / "exp_000001.json"));
}

TEST(Run, LogsWhenRequested) {
  TempDir tmp;
  put(tmp.path() / "c.yaml", std::string(kSmall) + "write_logs: true\n");
  const auto out = tmp.path() / "res";
  ASSERT_EQ(run_cli({"run", (tmp.path() / "c.yaml").string(), "--out", out.string(), "--policy",
                     "fpscrub", "-n", "1"}),
            0);
  const auto trace = slurp(out / "logs" / "fpscrub" / "exp_000000_trace.csv");
  EXPECT_EQ(trace.rfind("# root_seed=", 0), 0u);
  EXPECT_NE(trace.find("tick,setpoint,measured_speed,actuation,diverged_flag"), std::string::npos);
  EXPECT_TRUE(fs::exists(out / "logs" / "fpscrub" / "exp_000000_scrub.csv"));
  EXPECT_TRUE(fs::exists(out / "logs" / "fpscrub" / "exp_000000_decisions.csv"));
}

TEST(Run, ExitCodes) {
  TempDir tmp;
  put(tmp.path() / "neg.yaml", "experiment:\n  duration: -5\n");
  std::string o, e;
  EXPECT_EQ(run_cli({"run", (tmp.path() / "neg.yaml").string(), "--out", (tmp.path() / "x").string()},
                    &o, &e),
            kInvalidConfig);
  EXPECT_NE(e.find("experiment.duration"), std::string::npos) << e;

  put(tmp.path() / "unknown.yaml", "bogus_key: 1\n");
  EXPECT_EQ(run_cli({"run", (tmp.path() / "unknown.yaml").string()}), kInvalidConfig);
  EXPECT_EQ(run_cli({"run", "--profile", "stormy"}), kInvalidConfig);
  EXPECT_EQ(run_cli({"run", (tmp.path() / "missing.yaml").string()}), kIoFailure);

  put(tmp.path() / "blocker", "a file, not a directory");
  put(tmp.path() / "c.yaml", kSmall);
  EXPECT_EQ(run_cli({"run", (tmp.path() / "c.yaml").string(), "--out",
                     (tmp.path() / "blocker" / "sub").string()}),
            kIoFailure);
}

TEST(Replay, VerifiesTamperAndDerive) {
  TempDir tmp;
  put(tmp.path() / "c.yaml", kSmall);
  const auto out = tmp.path() / "res";
  ASSERT_EQ(run_cli({"run", (tmp.path() / "c.yaml").string(), "--out", out.string()}), 0);
  const auto rec = out / "records" / "blind_full_100" / "exp_000002.json";
  std::string o, e;
  EXPECT_EQ(run_cli({"replay", rec.string()}, &o, &e), 0) << e;
  EXPECT_NE(o.find("verified"), std::string::npos);

  auto j = nlohmann::json::parse(slurp(rec));
  j["config"]["seed"] = j["config"]["seed"].get<std::uint64_t>() + 1;
  put(tmp.path() / "tampered.json", j.dump());
  EXPECT_EQ(run_cli({"replay", (tmp.path() / "tampered.json").string()}, &o, &e), kFailed);
  EXPECT_NE(e.find("fingerprint mismatch"), std::string::npos);

  const auto derived = tmp.path() / "derived.json";
  EXPECT_EQ(run_cli({"replay", rec.string(), "--policy", "readback:20", "--out", derived.string()},
                    &o, &e),
            0);
  EXPECT_NE(o.find("derived"), std::string::npos);
  const auto d = io::record_from_json(nlohmann::json::parse(slurp(derived)));
  EXPECT_TRUE(d.derived);
  EXPECT_EQ(d.config.policy.label(), "readback:20");
  EXPECT_EQ(run_cli({"replay", (tmp.path() / "nope.json").string()}), kIoFailure);
}

TEST(Summarize, TablesAndGrouping) {
  TempDir tmp;
  put(tmp.path() / "c.yaml", kSmall);
  ASSERT_EQ(run_cli({"run", (tmp.path() / "c.yaml").string(), "--out", (tmp.path() / "r" / "one").string()}), 0);
  ASSERT_EQ(run_cli({"run", (tmp.path() / "c.yaml").string(), "--out", (tmp.path() / "r" / "two").string(),
                     "--seed", "5", "--policy", "none"}),
            0);
  std::string o, e;
  ASSERT_EQ(run_cli({"summarize", (tmp.path() / "r").string()}, &o, &e), 0) << e;
  const auto table = slurp(tmp.path() / "r" / "summary" / "comparison.csv");
  std::istringstream in(table);
  std::string line;
  std::getline(in, line);
  EXPECT_NE(line.find("failure_diff_ci_lo"), std::string::npos);
  std::vector<std::string> rows;
  while (std::getline(in, line)) rows.push_back(line);
  ASSERT_EQ(rows.size(), 3u);
  int seed5 = 0;
  for (const auto& r : rows) seed5 += r.find(",5,none,") != std::string::npos;
  EXPECT_EQ(seed5, 1);
  bool series = false;
  for (const auto& f : fs::directory_iterator(tmp.path() / "r" / "summary" / "series"))
    series |= f.path().string().find("blind_full_100_energy.csv") != std::string::npos;
  EXPECT_TRUE(series);

  fs::create_directories(tmp.path() / "empty");
  EXPECT_EQ(run_cli({"summarize", (tmp.path() / "empty").string()}), kIoFailure);
}

TEST(GenConfig, CommentedDefaultsParseBack) {
  std::string o;
  ASSERT_EQ(run_cli({"gen-config"}, &o), 0);
  EXPECT_NE(o.find('#'), std::string::npos);
  EXPECT_EQ(parse_campaign(o), campaign::CampaignConfig{});
}
