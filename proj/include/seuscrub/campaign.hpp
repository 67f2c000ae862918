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

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "seuscrub/config_memory.hpp"
#include "seuscrub/dut_cruise.hpp"
#include "seuscrub/environment.hpp"
#include "seuscrub/fault_injection.hpp"
#include "seuscrub/fpscrub.hpp"
#include "seuscrub/scrubbing.hpp"
#include "seuscrub/stats.hpp"

namespace seuscrub::campaign {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kModelVersion = "seuscrub-model-1";

enum class FaultMode { None, Uniform, Poisson, Explicit };

std::string to_string(FaultMode m);
FaultMode fault_mode_from_string(const std::string& s);

struct ExplicitFault {
  Tick t = 0;
  fault::FaultKind kind = fault::FaultKind::Sbe;
  memory::BitAddress center;
  std::uint32_t radius = 0;

  bool operator==(const ExplicitFault&) const = default;
};

struct FaultConfig {
  FaultMode mode = FaultMode::Uniform;
  std::uint32_t count = 10;
  fault::KindWeights weights{1, 0, 0};
  std::uint32_t mbe_radius_max = 3;
  double base_rate = 2.5e-6;  // upsets per tick at the reference flux
  std::vector<ExplicitFault> events;

  bool operator==(const FaultConfig&) const = default;
};

/// Hand placement of a single bit. element is an element name, "UNUSED" or
/// "NON_SENSITIVE"; overrides sharing a group label are bound together.
struct MapOverride {
  memory::BitAddress bit;
  std::string element;
  std::optional<std::uint32_t> group;

  bool operator==(const MapOverride&) const = default;
};

struct MapConfig {
  dut::MapParams params;  // params.seed is derived from the root seed
  std::vector<MapOverride> overrides;

  bool operator==(const MapConfig&) const = default;
};

struct EnvironmentConfig {
  env::Profile profile;
  Tick cadence = 100;
  env::EnvironmentParams params;

  bool operator==(const EnvironmentConfig&) const = default;
};

struct DeviceConfig {
  std::uint32_t frame_count = 48;
  std::uint32_t frame_size = memory::kDefaultFrameSize;

  bool operator==(const DeviceConfig&) const = default;
};

/// Everything one experiment depends on. Sub-seeds derive from root_seed
/// (shared device image and map) and seed (fault plan, environment).
struct ExperimentConfig {
  std::uint64_t root_seed = 1;
  std::uint64_t index = 0;
  std::uint64_t seed = 0;
  Tick duration = 42000;
  dut::SquareWave workload;
  dut::PidParams controller;
  dut::PlantModel plant;
  DeviceConfig device;
  fault::RegionOfInterest region{8, 40, 0, memory::kDefaultFrameSize};
  FaultConfig faults;
  MapConfig map;
  EnvironmentConfig environment;
  scrub::PolicySpec policy;
  scrub::PortCostModel ports;
  fpscrub::FpScrubConfig fpscrub;
  double compute_fraction = 0.1;
  Tick latency_threshold = 0;  // 0 means one workload half-period
  bool root_cause = true;

  void validate() const;
  Tick high_latency_threshold() const {
    return latency_threshold > 0 ? latency_threshold : workload.half_period;
  }
  bool operator==(const ExperimentConfig&) const = default;
};

std::uint64_t experiment_seed(std::uint64_t root_seed, std::uint64_t index);

/// Immutable state shared by every experiment of one configuration family.
struct Context {
  memory::ConfigMemory prototype;
  dut::SensitivityMap map;
  dut::Trace goldrun;
};

/// Builds (or fetches from a process-wide cache) the shared context.
std::shared_ptr<const Context> context_for(const ExperimentConfig& cfg);

dut::SensitivityMap build_map(const ExperimentConfig& cfg);
dut::Trace run_goldrun(const ExperimentConfig& cfg);
env::EnvironmentTrace environment_for(const ExperimentConfig& cfg);
fault::FaultPlan plan_for(const ExperimentConfig& cfg, const env::EnvironmentTrace& trace);
std::unique_ptr<scrub::ScrubPolicy> policy_for(const ExperimentConfig& cfg);

struct ScrubMetrics {
  std::uint64_t total_actions = 0;
  std::uint64_t frames_written = 0;
  Tick port_busy_total = 0;
  double energy_total = 0.0;
  std::uint64_t uncorrectable = 0;
  double mean_residence = 0.0;
  double median_residence = 0.0;

  bool operator==(const ScrubMetrics&) const = default;
};

struct SimOptions {
  bool stop_at_divergence = false;
  bool keep_trace = false;
  bool keep_actions = false;
};

struct SimResult {
  std::optional<Tick> first_divergence;
  std::vector<fault::AppliedFault> applied;
  std::vector<Tick> residences;  // per flipped sensitive bit, censored at run end
  std::vector<double> energy_by_second;
  ScrubMetrics metrics;
  std::uint64_t trace_digest = 0;
  dut::Trace trace;
  std::vector<scrub::ScrubAction> actions;
  std::vector<fpscrub::Decision> decisions;
};

/// The tick loop. Per tick: the policy runs if the port is idle, then due
/// faults land, then the DUT steps and its output is compared to the goldrun.
SimResult simulate(const Context& ctx, const ExperimentConfig& cfg,
                   const env::EnvironmentTrace& environment, const fault::FaultPlan& plan,
                   scrub::ScrubPolicy& policy, const SimOptions& options = {});

struct AppliedFaultInfo {
  std::uint32_t id = 0;
  Tick trigger_time = 0;
  Tick applied_at = 0;
  fault::FaultKind kind = fault::FaultKind::Sbe;
  memory::BitAddress center;
  std::uint32_t radius = 0;
  std::uint32_t cells = 0;
  bool sensitive = false;

  bool operator==(const AppliedFaultInfo&) const = default;
};

struct RootCause {
  enum class Kind { Single, Interacting };
  Kind kind = Kind::Single;
  std::vector<std::uint32_t> ids;

  bool operator==(const RootCause&) const = default;
};

struct LatencyEntry {
  std::uint32_t fault_id = 0;
  Tick latency = 0;
  bool high = false;

  bool operator==(const LatencyEntry&) const = default;
};

struct Attribution {
  RootCause cause;
  std::uint32_t isolated_replays = 0;
  std::uint32_t subset_replays = 0;
};

struct ExperimentRecord {
  int schema_version = kSchemaVersion;
  std::string model_version = kModelVersion;
  std::uint64_t fingerprint = 0;
  ExperimentConfig config;
  bool derived = false;

  std::vector<AppliedFaultInfo> applied;
  bool failure = false;
  std::optional<Tick> first_divergence;
  std::optional<RootCause> root_cause;
  std::uint32_t isolated_replays = 0;
  std::uint32_t subset_replays = 0;
  std::vector<LatencyEntry> latencies;
  ScrubMetrics scrub;
  std::vector<double> energy_by_second;
  std::vector<Tick> residences;
  std::uint64_t trace_digest = 0;

  bool operator==(const ExperimentRecord&) const = default;
};

/// Isolation replays: every applied fault alone first, then subsets of the
/// sensitive faults applied up to the divergence by size 2, 3, then all of
/// them, in lexicographic order of application.
Attribution attribute_root_cause(const Context& ctx, const ExperimentConfig& cfg,
                                 const env::EnvironmentTrace& environment,
                                 const fault::FaultPlan& plan, Tick first_divergence,
                                 std::span<const fault::AppliedFault> applied);

std::vector<LatencyEntry> measure_latency(const RootCause& cause, Tick first_divergence,
                                          std::span<const AppliedFaultInfo> applied,
                                          Tick high_threshold);

struct RunArtifacts {
  dut::Trace trace;
  std::vector<scrub::ScrubAction> actions;
  std::vector<fpscrub::Decision> decisions;
};

ExperimentRecord run_experiment(const ExperimentConfig& cfg, RunArtifacts* artifacts = nullptr);
ExperimentRecord run_experiment(const Context& ctx, const ExperimentConfig& cfg,
                                RunArtifacts* artifacts = nullptr);

/// Campaign-level settings around a template experiment.
struct CampaignConfig {
  std::uint64_t root_seed = 1;
  std::uint64_t experiments = 1000;
  unsigned workers = 0;  // 0 = hardware concurrency
  std::string output = "results";
  std::vector<scrub::PolicySpec> policies{scrub::PolicySpec{}};
  bool write_logs = false;
  ExperimentConfig experiment;

  void validate() const;
  ExperimentConfig experiment_at(const scrub::PolicySpec& policy, std::uint64_t index) const;
  bool operator==(const CampaignConfig&) const = default;
};

struct CampaignResult {
  std::vector<scrub::PolicySpec> policies;
  std::vector<std::vector<ExperimentRecord>> records;  // [policy][experiment]
};

using ProgressFn = std::function<void(std::uint64_t done, std::uint64_t total)>;
using ArtifactSink =
    std::function<void(const ExperimentRecord&, const RunArtifacts&)>;

/// Runs every (policy, experiment) pair on worker threads; results are placed
/// by key, so they do not depend on scheduling.
CampaignResult run_campaign(const CampaignConfig& cfg, const ProgressFn& progress = {},
                            const ArtifactSink& sink = {});

struct PolicySummary {
  std::string policy;
  stats::Proportion failure;
  double mean_residence = 0.0;
  double median_residence = 0.0;
  double energy_total = 0.0;
  double energy_mean = 0.0;
  Tick port_busy_total = 0;
  double high_latency_fraction = 0.0;
  double single_cause_fraction = 0.0;
  // paired differences against the first policy
  double failure_diff = 0.0;
  stats::Interval failure_diff_ci;
  double energy_diff = 0.0;
  stats::Interval energy_diff_ci;
};

/// Throws std::invalid_argument if the groups were not run on the same seeds.
std::vector<PolicySummary> compare_policies(
    const std::vector<std::vector<ExperimentRecord>>& by_policy);

}  // namespace seuscrub::campaign
