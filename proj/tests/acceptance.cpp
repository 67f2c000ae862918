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

// One line per acceptance criterion; exit status is the number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "seuscrub/campaign.hpp"
#include "seuscrub/cli.hpp"
#include "seuscrub/serialization.hpp"

using namespace seuscrub;
using namespace seuscrub::campaign;
namespace fs = std::filesystem;

namespace {

// pinned tolerances and budgets
constexpr double kEccBudgetS = 10.0;
constexpr double kFaultBudgetS = 5.0;
constexpr double kCampaignBudgetS = 300.0;
constexpr double kSbeFractionTol = 0.01;  // relative
constexpr double kEnergyRatioMax = 0.25;
constexpr double kFixedPointTol = 1.0 / 1024.0;
constexpr int kPairedSeeds = 200;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int n, bool pass, const std::string& detail) {
  std::printf("criterion %d: %s  %s\n", n, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(double v, int prec = 4) {
  std::ostringstream o;
  o.precision(prec);
  o << v;
  return o.str();
}

// -- 1 -------------------------------------------------------------------------

void ecc_soundness() {
  const auto t0 = Clock::now();
  std::mt19937_64 g(0xecc);
  std::uint64_t violations = 0, cases = 0;
  auto payload = [&](std::uint32_t n) {
    memory::BitVector v(n);
    for (std::uint32_t i = 0; i < n; ++i) v.set(i, g() & 1U);
    return v;
  };
  using Status = memory::DecodeResult::Status;

  const memory::EccLayout small(32);
  for (int rep = 0; rep < 256; ++rep) {
    auto f = memory::ecc_encode_frame(small, payload(small.payload_bits()));
    for (std::uint32_t k = 0; k < 32; ++k) {
      f.flip(k);
      const auto r = memory::ecc_decode_frame(small, f);
      f.flip(k);
      violations += !(r.status == Status::Corrected && r.position == k);
      ++cases;
    }
  }
  for (int rep = 0; rep < 32; ++rep) {
    auto f = memory::ecc_encode_frame(small, payload(small.payload_bits()));
    for (std::uint32_t a = 0; a < 32; ++a)
      for (std::uint32_t b = a + 1; b < 32; ++b) {
        f.flip(a);
        f.flip(b);
        violations += memory::ecc_decode_frame(small, f).status != Status::DetectedUncorrectable;
        f.flip(a);
        f.flip(b);
        ++cases;
      }
  }

  const memory::EccLayout big;
  for (int rep = 0; rep < 10000; ++rep) {
    auto f = memory::ecc_encode_frame(big, payload(big.payload_bits()));
    const auto k = static_cast<std::uint32_t>(g() % 1312);
    f.flip(k);
    const auto r = memory::ecc_decode_frame(big, f);
    violations += !(r.status == Status::Corrected && r.position == k);
    const auto a = static_cast<std::uint32_t>(g() % 1312);
    auto b = static_cast<std::uint32_t>(g() % 1311);
    if (b >= a) ++b;
    f.flip(k);
    f.flip(a);
    f.flip(b);
    violations += memory::ecc_decode_frame(big, f).status != Status::DetectedUncorrectable;
    cases += 2;
  }
  const double s = seconds_since(t0);
  report(1, violations == 0 && s < kEccBudgetS,
         "ECC soundness: " + std::to_string(violations) + " violations in " +
             std::to_string(cases) + " cases, " + fmt(s, 3) + " s");
}

// -- 2 -------------------------------------------------------------------------

void fault_statistics() {
  const auto t0 = Clock::now();
  const fault::RegionOfInterest roi{0, 48, 0, 1312};
  const auto plan = fault::generate_plan(9, 100000, roi, 42000, {20, 0, 1}, 3);
  std::size_t sbe = 0;
  for (const auto& e : plan.events) sbe += e.kind == fault::FaultKind::Sbe;
  const double frac = static_cast<double>(sbe) / 100000.0;
  const double target = 20.0 / 21.0;
  const bool ratio_ok = std::abs(frac - target) <= kSbeFractionTol * target;

  std::uint64_t mismatches = 0;
  const fault::RegionOfInterest grid{0, 16, 0, 16};
  for (int r = 1; r <= 4; ++r)
    for (int f = 0; f < 16; ++f)
      for (int b = 0; b < 16; ++b) {
        std::set<std::pair<int, int>> ours;
        for (const auto& c : fault::resolve_mbe_cells(
                 {static_cast<std::uint32_t>(f), static_cast<std::uint32_t>(b)},
                 static_cast<std::uint32_t>(r), grid))
          ours.insert({static_cast<int>(c.frame), static_cast<int>(c.bit)});
        mismatches += ours != oracle::disc(f, b, r, 16, 16);
      }
  const double s = seconds_since(t0);
  report(2, ratio_ok && mismatches == 0 && s < kFaultBudgetS,
         "fault model: SBE fraction " + fmt(frac, 5) + " (target " + fmt(target, 5) +
             "), MBE mismatches " + std::to_string(mismatches) + ", " + fmt(s, 3) + " s");
}

// -- 3 -------------------------------------------------------------------------

CampaignConfig baseline_campaign(std::uint64_t experiments) {
  CampaignConfig c;
  c.experiments = experiments;
  c.policies = {scrub::PolicySpec{}};
  return c;
}

void campaign_shape() {
  const auto t0 = Clock::now();

  // (a) baseline campaign, run twice
  const auto cfg = baseline_campaign(1000);
  const auto first = run_campaign(cfg);
  const auto second = run_campaign(cfg);
  const bool deterministic = cli::aggregate_csv(cfg, first) == cli::aggregate_csv(cfg, second);
  const auto table = compare_policies(first.records);
  const auto& fail = table.at(0).failure;

  // (b) failure fraction against the sensitive-bit fraction
  std::vector<double> fractions;
  std::uint64_t zero_map_failures = 0;
  for (const double sens : {0.0, 0.1, 0.5, 1.0}) {
    auto c = baseline_campaign(300);
    auto& p = c.experiment.map.params;
    p.sensitive = sens;
    p.unused = 0.4 * (1.0 - sens);
    p.non_sensitive = 1.0 - sens - p.unused;
    const auto res = run_campaign(c);
    std::uint64_t n = 0;
    for (const auto& r : res.records[0]) n += r.failure;
    if (sens == 0.0) zero_map_failures = n;
    fractions.push_back(static_cast<double>(n) / 300.0);
  }
  bool monotone = zero_map_failures == 0;
  for (std::size_t i = 1; i < fractions.size(); ++i) monotone &= fractions[i] >= fractions[i - 1];

  // (c) constructed interacting pair, then isolated replays of every single cause
  auto pair_cfg = baseline_campaign(1).experiment_at(scrub::PolicySpec{}, 0);
  const memory::BitAddress a{15, 200}, b{16, 200};
  pair_cfg.map.overrides = {{a, "ERR_PATH_STUCK_LOW", 1}, {b, "ERR_PATH_STUCK_LOW", 1}};
  pair_cfg.faults.mode = FaultMode::Explicit;
  pair_cfg.faults.events = {{100, fault::FaultKind::Sbe, a, 0}, {200, fault::FaultKind::Sbe, b, 0}};
  const auto pair = run_experiment(pair_cfg);
  const bool interacting = pair.failure && pair.root_cause &&
                           pair.root_cause->kind == RootCause::Kind::Interacting &&
                           pair.root_cause->ids == std::vector<std::uint32_t>{0, 1};

  std::uint64_t singles = 0, reproduced = 0;
  for (const auto& rec : first.records[0]) {
    if (!rec.failure || rec.root_cause->kind != RootCause::Kind::Single) continue;
    ++singles;
    const auto& culprit = rec.applied.at(rec.root_cause->ids[0]);
    auto alone = rec.config;
    alone.faults.mode = FaultMode::Explicit;
    alone.faults.events = {{culprit.trigger_time, culprit.kind, culprit.center, culprit.radius}};
    alone.root_cause = false;
    reproduced += run_experiment(alone).failure;
  }

  const double s = seconds_since(t0);
  std::string series;
  for (const double f : fractions) series += (series.empty() ? "" : "/") + fmt(f, 3);
  report(3, deterministic && fail.trials == 1000 && monotone && interacting && singles > 0 &&
                reproduced == singles && s < kCampaignBudgetS,
         "campaign shape: failure " + fmt(fail.value, 3) + " CI [" + fmt(fail.ci.lo, 3) + ", " +
             fmt(fail.ci.hi, 3) + "], deterministic " + (deterministic ? "yes" : "no") +
             ", by sensitive fraction 0/10/50/100% " + series + ", pair " +
             (interacting ? "Interacting" : "misclassified") + ", single-cause replays " +
             std::to_string(reproduced) + "/" + std::to_string(singles) + ", " + fmt(s, 3) + " s");
}

// -- 4 -------------------------------------------------------------------------

/// ReadbackCompare wrapper that checks every write against the dirty set seen
/// just before the step.
class CheckedReadback final : public scrub::ScrubPolicy {
 public:
  CheckedReadback(Tick period, const scrub::PortCostModel& cost) : inner_(period, cost) {}

  std::vector<scrub::ScrubAction> step(memory::ConfigMemory& mem, Tick now, Tick idle,
                                       const scrub::Observation& obs) override {
    const auto dirty = mem.dirty_frames();
    auto acts = inner_.step(mem, now, idle, obs);
    std::vector<std::uint32_t> written;
    for (const auto& a : acts)
      if (a.kind != scrub::ActionKind::ReadOnlyScan)
        written.insert(written.end(), a.frames.begin(), a.frames.end());
    if (!acts.empty()) {
      ++scans;
      violations += written != dirty;
      writes += written.size();
    }
    return acts;
  }
  std::string label() const override { return inner_.label(); }

  std::uint64_t scans = 0, writes = 0, violations = 0;

 private:
  scrub::ReadbackCompare inner_;
};

void policy_dominance() {
  CampaignConfig c = baseline_campaign(kPairedSeeds);
  c.policies = {scrub::PolicySpec::parse("none"), scrub::PolicySpec::parse("blind_full:100")};
  const auto res = run_campaign(c);
  int unpaired = 0;
  std::vector<double> residences;
  for (int i = 0; i < kPairedSeeds; ++i) {
    unpaired += res.records[1][i].failure > res.records[0][i].failure;
    for (const Tick r : res.records[1][i].residences) residences.push_back(static_cast<double>(r));
  }
  const double mean_res = stats::mean(residences);
  const double bound =
      100.0 + static_cast<double>(c.experiment.device.frame_count * c.experiment.ports.t_frame_write);

  // write-minimality, with multi-frame upsets mixed in
  std::uint64_t scans = 0, writes = 0, violations = 0;
  CampaignConfig rb = baseline_campaign(kPairedSeeds);
  rb.experiment.faults.weights = {20, 2, 1};
  for (int i = 0; i < kPairedSeeds; ++i) {
    auto cfg = rb.experiment_at(scrub::PolicySpec::parse("readback:100"), static_cast<std::uint64_t>(i));
    const auto ctx = context_for(cfg);
    const auto envt = environment_for(cfg);
    const auto plan = plan_for(cfg, envt);
    CheckedReadback policy(100, cfg.ports);
    simulate(*ctx, cfg, envt, plan, policy);
    scans += policy.scans;
    writes += policy.writes;
    violations += policy.violations;
  }
  report(4, unpaired == 0 && mean_res < bound && violations == 0 && writes > 0,
         "scrub dominance: blind_full:100 worse than none in " + std::to_string(unpaired) + "/" +
             std::to_string(kPairedSeeds) + " pairings, mean residence " + fmt(mean_res) +
             " < " + fmt(bound) + " ticks, readback write-minimality violations " +
             std::to_string(violations) + " over " + std::to_string(scans) + " scans (" +
             std::to_string(writes) + " frames written)");
}

// -- 5 -------------------------------------------------------------------------

struct Paired {
  double fp_energy = 0, bp_energy = 0;
  double fp_fail = 0, bp_fail = 0;
  stats::Interval diff_ci;
};

Paired fp_vs_partial(env::ProfileKind profile) {
  CampaignConfig c = baseline_campaign(kPairedSeeds);
  c.experiment.faults.mode = FaultMode::Poisson;
  c.experiment.environment.profile = {profile, {}};
  const auto p_min = c.experiment.fpscrub.p_min;
  c.policies = {scrub::PolicySpec::parse("fpscrub"),
                scrub::PolicySpec::parse("blind_partial:" + std::to_string(p_min))};
  const auto res = run_campaign(c);
  const auto table = compare_policies({res.records[1], res.records[0]});
  Paired out;
  out.bp_energy = table[0].energy_total;
  out.fp_energy = table[1].energy_total;
  out.bp_fail = table[0].failure.value;
  out.fp_fail = table[1].failure.value;
  out.diff_ci = table[1].failure_diff_ci;
  return out;
}

void fpscrub_claims() {
  const auto benign = fp_vs_partial(env::ProfileKind::Benign);
  const auto harsh = fp_vs_partial(env::ProfileKind::Harsh);
  const double ratio = benign.fp_energy / benign.bp_energy;

  // fallback equivalence
  CampaignConfig c = baseline_campaign(20);
  c.experiment.faults.mode = FaultMode::Poisson;
  c.experiment.faults.base_rate = 1e-4;
  c.experiment.fpscrub.theta_low = c.experiment.fpscrub.theta_high = 0.0;
  c.experiment.fpscrub.io_bounds.reset();
  int identical = 0;
  for (std::uint64_t i = 0; i < 20; ++i) {
    RunArtifacts fa, ba;
    run_experiment(c.experiment_at(scrub::PolicySpec::parse("fpscrub"), i), &fa);
    run_experiment(c.experiment_at(scrub::PolicySpec::parse("blind_partial:" +
                                                            std::to_string(c.experiment.fpscrub.p_min)),
                                   i),
                   &ba);
    identical += !fa.actions.empty() && scrub::scrub_log_csv(fa.actions) == scrub::scrub_log_csv(ba.actions);
  }

  const bool pass = ratio <= kEnergyRatioMax && benign.diff_ci.contains(0.0) &&
                    harsh.diff_ci.contains(0.0) && identical == 20;
  report(5, pass,
         "fpScrub: benign energy ratio " + fmt(ratio) + " (<= " + fmt(kEnergyRatioMax) +
             "), benign failure diff CI [" + fmt(benign.diff_ci.lo) + ", " + fmt(benign.diff_ci.hi) +
             "], harsh failure " + fmt(harsh.fp_fail, 3) + " vs " + fmt(harsh.bp_fail, 3) +
             " diff CI [" + fmt(harsh.diff_ci.lo) + ", " + fmt(harsh.diff_ci.hi) +
             "], fallback logs identical " + std::to_string(identical) + "/20");
}

// -- 6 -------------------------------------------------------------------------

void budgeted_recovery() {
  ExperimentConfig cfg;
  const auto ctx = context_for(cfg);
  auto mem = ctx->prototype;
  const std::uint32_t lo = cfg.region.frame_lo;
  for (std::uint32_t f = lo; f < lo + 10; ++f) {
    const std::vector<memory::BitAddress> cells{{f, 7 * (f - lo)}};
    mem.flip_bits(cells);
  }
  scrub::Budgeted policy(10, 3, cfg.ports);
  std::vector<std::size_t> remaining;
  for (Tick t = 10; t <= 40; t += 10) {
    policy.step(mem, t, 10, {});
    remaining.push_back(mem.dirty_frames().size());
  }
  const bool counts = remaining == std::vector<std::size_t>{7, 4, 1, 0};
  const bool golden = mem.live() == mem.golden() &&
                      memory::device_crc(mem) == memory::device_crc(mem.golden());
  bool formula = true;
  for (std::uint64_t w = 1; w <= 4; ++w)
    formula &= scrub::budgeted_progress(10, 3, w) == remaining[w - 1];
  std::string series;
  for (const auto r : remaining) series += (series.empty() ? "" : ", ") + std::to_string(r);
  report(6, counts && golden && formula,
         "budgeted recovery: dirty after windows 1..4 = " + series + ", memory equals golden " +
             (golden ? "yes" : "no"));
}

// -- 7 -------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void end_to_end() {
  const fs::path root = fs::temp_directory_path() / ("seuscrub_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  std::ostringstream sink;
  cli::RunOverrides ov;
  ov.out = (root / "a").string();
  const int rc1 = cli::cmd_run(std::nullopt, ov, sink, sink);
  ov.out = (root / "b").string();
  ov.workers = 1;
  const int rc2 = cli::cmd_run(std::nullopt, ov, sink, sink);
  const auto agg_a = slurp(root / "a" / "aggregate.csv");
  const bool same = rc1 == 0 && rc2 == 0 && !agg_a.empty() && agg_a == slurp(root / "b" / "aggregate.csv");

  int verified = 0;
  for (int k = 0; k < 100; ++k) {
    char name[32];
    std::snprintf(name, sizeof(name), "exp_%06d.json", k * 10 + 3);
    std::ostringstream o, e;
    verified += cli::cmd_replay(root / "a" / "records" / "none" / name, std::nullopt, std::nullopt,
                                o, e) == 0 &&
                o.str().rfind("verified", 0) == 0;
  }
  fs::remove_all(root);
  report(7, same && verified == 100,
         std::string("determinism: aggregate CSVs ") + (same ? "byte-identical" : "DIFFER") +
             ", replay verified " + std::to_string(verified) + "/100");
}

// -- 8 -------------------------------------------------------------------------

void fixed_point_fidelity() {
  const ExperimentConfig cfg;
  const auto trace = run_goldrun(cfg);
  const oracle::LoopParams p{cfg.controller.kp.to_double(), cfg.controller.ki.to_double(),
                             cfg.controller.kd.to_double(), cfg.controller.u_min.to_double(),
                             cfg.controller.u_max.to_double(), cfg.plant.a.to_double(),
                             cfg.plant.b.to_double()};
  const auto ref = oracle::simulate_loop(p, cfg.workload.low.to_double(),
                                         cfg.workload.high.to_double(), cfg.workload.half_period,
                                         cfg.duration);
  double worst = 0;
  for (std::size_t t = 0; t < trace.size(); ++t) {
    worst = std::max(worst, std::abs(trace[t].measured.to_double() - ref[t].measured));
    worst = std::max(worst, std::abs(trace[t].actuation.to_double() - ref[t].actuation));
  }
  report(8, trace.size() == 42000 && worst < kFixedPointTol,
         "fixed-point fidelity: worst deviation " + fmt(worst, 3) + " over " +
             std::to_string(trace.size()) + " samples (tolerance " + fmt(kFixedPointTol, 3) + ")");
}

}  // namespace

int main() {
  ecc_soundness();
  fault_statistics();
  campaign_shape();
  policy_dominance();
  fpscrub_claims();
  budgeted_recovery();
  end_to_end();
  fixed_point_fidelity();
  std::printf("%d of 8 criteria failed\n", failures);
  return failures;
}
