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

#include "seuscrub/campaign.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "seuscrub/rng.hpp"
#include "seuscrub/serialization.hpp"

namespace seuscrub::campaign {

std::string to_string(FaultMode m) {
  switch (m) {
    case FaultMode::None:
      return "none";
    case FaultMode::Uniform:
      return "uniform";
    case FaultMode::Poisson:
      return "poisson";
    case FaultMode::Explicit:
      return "explicit";
  }
  return "?";
}

FaultMode fault_mode_from_string(const std::string& s) {
  if (s == "none") return FaultMode::None;
  if (s == "uniform") return FaultMode::Uniform;
  if (s == "poisson") return FaultMode::Poisson;
  if (s == "explicit") return FaultMode::Explicit;
  throw std::invalid_argument("unknown fault mode '" + s + "'");
}

std::uint64_t experiment_seed(std::uint64_t root_seed, std::uint64_t index) {
  return derive_seed(root_seed, "experiment", index);
}

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& msg) {
  throw std::invalid_argument(field + ": " + msg);
}

template <class F>
void check(const std::string& field, F&& f) {
  try {
    f();
  } catch (const std::invalid_argument& e) {
    fail(field, e.what());
  }
}

bool is_class_override(const std::string& s) { return s == "UNUSED" || s == "NON_SENSITIVE"; }

}  // namespace

void ExperimentConfig::validate() const {
  if (duration < 1) fail("duration", "must be >= 1");
  check("workload", [&] { workload.validate(); });
  check("controller", [&] { controller.validate(); });
  check("plant", [&] { plant.validate(); });
  if (device.frame_count < 1) fail("device.frame_count", "must be >= 1");
  if (device.frame_size < memory::kMinFrameSize)
    fail("device.frame_size", "must be >= " + std::to_string(memory::kMinFrameSize));
  const memory::Geometry geom(device.frame_count, device.frame_size);
  check("region", [&] { region.validate(geom); });

  switch (faults.mode) {
    case FaultMode::Uniform:
    case FaultMode::Poisson:
      if (faults.weights.total() == 0) fail("faults.weights", "must not all be zero");
      if (faults.weights.mbe > 0 && faults.mbe_radius_max < 1)
        fail("faults.mbe_radius_max", "must be >= 1 when MBEs are enabled");
      break;
    default:
      break;
  }
  if (!(faults.base_rate >= 0.0)) fail("faults.base_rate", "must be >= 0");
  if (faults.mode != FaultMode::Explicit && !faults.events.empty())
    fail("faults.events", "only allowed with mode explicit");
  for (std::size_t i = 0; i < faults.events.size(); ++i) {
    const auto& e = faults.events[i];
    const std::string p = "faults.events[" + std::to_string(i) + "]";
    if (e.t < 0 || e.t >= duration) fail(p + ".t", "must lie in [0, duration)");
    check(p, [&] { fault::make_event(0, e.t, e.kind, e.center, e.radius, region); });
  }

  check("map", [&] { map.params.validate(); });
  for (std::size_t i = 0; i < map.overrides.size(); ++i) {
    const auto& o = map.overrides[i];
    const std::string p = "map.overrides[" + std::to_string(i) + "]";
    if (!geom.contains(o.bit)) fail(p, "bit outside the device");
    if (!region.contains(o.bit)) fail(p, "bit outside the region of interest");
    if (is_class_override(o.element)) {
      if (o.group) fail(p + ".group", "only valid for sensitive elements");
    } else {
      check(p + ".element", [&] { dut::element_from_string(o.element); });
    }
  }

  if (environment.cadence < 1) fail("environment.cadence", "must be >= 1");
  if (duration % environment.cadence != 0)
    fail("environment.cadence", "must divide duration");
  check("environment", [&] { environment.profile.validate(duration); });
  check("ports", [&] { ports.validate(); });
  check("fpscrub", [&] { fpscrub.validate(); });
  if (!(compute_fraction >= 0.0 && compute_fraction < 1.0))
    fail("compute_fraction", "must lie in [0, 1)");
  if (latency_threshold < 0) fail("latency_threshold", "must be >= 0");
  if (policy.kind == scrub::PolicyKind::PeriodicBlindPartial && policy.frames.hi > device.frame_count)
    fail("policy", "frame subset exceeds the device");
}

void CampaignConfig::validate() const {
  if (experiments < 1) fail("experiments", "must be >= 1");
  if (policies.empty()) fail("policies", "need at least one policy");
  for (std::size_t i = 0; i < policies.size(); ++i)
    for (std::size_t k = 0; k < i; ++k)
      if (policies[i] == policies[k]) fail("policies", "duplicate policy " + policies[i].label());
  if (output.empty()) fail("output", "must not be empty");
  try {
    experiment.validate();
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string("experiment.") + e.what());
  }
}

ExperimentConfig CampaignConfig::experiment_at(const scrub::PolicySpec& policy,
                                               std::uint64_t index) const {
  ExperimentConfig c = experiment;
  c.root_seed = root_seed;
  c.index = index;
  c.seed = experiment_seed(root_seed, index);
  c.policy = policy;
  return c;
}

// ---------------------------------------------------------------------------

dut::SensitivityMap build_map(const ExperimentConfig& cfg) {
  const memory::Geometry geom(cfg.device.frame_count, cfg.device.frame_size);
  auto params = cfg.map.params;
  params.seed = derive_seed(cfg.root_seed, "map");
  auto map = dut::build_default_map(params, geom, cfg.region);
  std::map<std::uint32_t, std::pair<dut::Element, std::vector<memory::BitAddress>>> groups;
  for (const auto& o : cfg.map.overrides) {
    if (o.element == "UNUSED") {
      map.set_unused(o.bit);
    } else if (o.element == "NON_SENSITIVE") {
      map.set_non_sensitive(o.bit);
    } else if (o.group) {
      auto& g = groups[*o.group];
      g.first = dut::element_from_string(o.element);
      g.second.push_back(o.bit);
    } else {
      const memory::BitAddress one[] = {o.bit};
      map.bind(one, dut::element_from_string(o.element));
    }
  }
  for (const auto& [id, g] : groups) map.bind(g.second, g.first);
  return map;
}

dut::Trace run_goldrun(const ExperimentConfig& cfg) {
  return dut::simulate_nominal(cfg.controller, cfg.plant, cfg.workload, cfg.duration);
}

namespace {

nlohmann::json context_key(const ExperimentConfig& cfg) {
  auto j = io::to_json(cfg);
  // only what shapes the device, the map and the goldrun
  nlohmann::json k;
  for (const char* f : {"root_seed", "duration", "workload", "controller", "plant", "device",
                        "region", "map"})
    k[f] = j[f];
  return k;
}

}  // namespace

std::shared_ptr<const Context> context_for(const ExperimentConfig& cfg) {
  static std::mutex mu;
  static std::map<std::string, std::shared_ptr<const Context>> cache;
  const std::string key = context_key(cfg).dump();
  {
    std::lock_guard lock(mu);
    if (const auto it = cache.find(key); it != cache.end()) return it->second;
  }
  auto golden = memory::generate_encoded_image(cfg.device.frame_count, cfg.device.frame_size,
                                               derive_seed(cfg.root_seed, "image"));
  auto ctx = std::make_shared<const Context>(
      Context{memory::ConfigMemory(std::move(golden)), build_map(cfg), run_goldrun(cfg)});
  std::lock_guard lock(mu);
  if (cache.size() >= 32) cache.clear();
  return cache.emplace(key, ctx).first->second;
}

env::EnvironmentTrace environment_for(const ExperimentConfig& cfg) {
  return env::generate_trace(derive_seed(cfg.seed, "environment"), cfg.duration,
                             cfg.environment.cadence, cfg.environment.profile,
                             cfg.environment.params);
}

fault::FaultPlan plan_for(const ExperimentConfig& cfg, const env::EnvironmentTrace& trace) {
  const std::uint64_t seed = derive_seed(cfg.seed, "faults");
  const auto& f = cfg.faults;
  switch (f.mode) {
    case FaultMode::None:
      return {seed, f.weights, {}};
    case FaultMode::Uniform:
      return fault::generate_plan(seed, f.count, cfg.region, cfg.duration, f.weights,
                                  f.mbe_radius_max);
    case FaultMode::Poisson:
      return fault::poisson_arrival_plan(seed, f.base_rate, trace.flux_series(), 1.0,
                                         cfg.region, cfg.duration, f.weights, f.mbe_radius_max);
    case FaultMode::Explicit: {
      fault::FaultPlan plan{seed, f.weights, {}};
      std::vector<ExplicitFault> sorted = f.events;
      std::stable_sort(sorted.begin(), sorted.end(),
                       [](const auto& a, const auto& b) { return a.t < b.t; });
      std::uint32_t id = 0;
      for (const auto& e : sorted)
        plan.events.push_back(fault::make_event(id++, e.t, e.kind, e.center, e.radius, cfg.region));
      return plan;
    }
  }
  return {};
}

std::unique_ptr<scrub::ScrubPolicy> policy_for(const ExperimentConfig& cfg) {
  const scrub::FrameRange protected_frames{cfg.region.frame_lo, cfg.region.frame_hi};
  if (cfg.policy.kind == scrub::PolicyKind::FpScrub)
    return std::make_unique<fpscrub::FpScrubPolicy>(cfg.fpscrub, protected_frames, cfg.ports);
  return scrub::make_policy(cfg.policy, cfg.ports, protected_frames);
}

// ---------------------------------------------------------------------------

SimResult simulate(const Context& ctx, const ExperimentConfig& cfg,
                   const env::EnvironmentTrace& environment, const fault::FaultPlan& plan,
                   scrub::ScrubPolicy& policy, const SimOptions& options) {
  SimResult res;
  memory::ConfigMemory mem = ctx.prototype;
  dut::CruiseLoop loop(cfg.controller, cfg.plant);
  fault::FaultInjector injector(plan);

  const Tick idle = static_cast<Tick>(
      std::floor(static_cast<double>(policy.window()) * (1.0 - cfg.compute_fraction)));
  Tick port_free = 0;
  std::uint64_t seen_generation = mem.generation();
  std::map<memory::BitAddress, Tick> flipped;  // sensitive bits currently flipped
  std::vector<dut::DutInterface> io_window;
  res.energy_by_second.assign(
      static_cast<std::size_t>((cfg.duration + kTicksPerSecond - 1) / kTicksPerSecond), 0.0);
  if (options.keep_trace) res.trace.reserve(static_cast<std::size_t>(cfg.duration));

  auto sync = [&](Tick now) {
    if (mem.generation() == seen_generation) return;
    seen_generation = mem.generation();
    const auto& diff = mem.diff();
    for (auto it = flipped.begin(); it != flipped.end();) {
      if (!diff.count(it->first)) {
        res.residences.push_back(now - it->second);
        it = flipped.erase(it);
      } else {
        ++it;
      }
    }
    for (const auto& a : diff)
      if (ctx.map.classify(a) == dut::BitClass::Sensitive) flipped.try_emplace(a, now);
    loop.set_corruption(dut::apply_corruptions(ctx.map, diff));
  };

  std::uint64_t digest = 0xcbf29ce484222325ULL;
  Tick t = 0;
  for (; t < cfg.duration; ++t) {
    if (t >= port_free) {
      scrub::Observation obs;
      if (!environment.samples.empty()) obs.sample = &env::read_sensors(environment, t);
      obs.io_window = io_window;
      auto actions = policy.step(mem, t, idle, obs);
      io_window.clear();
      for (auto& a : actions) {
        ++res.metrics.total_actions;
        if (a.kind != scrub::ActionKind::ReadOnlyScan) res.metrics.frames_written += a.frames_touched();
        res.metrics.port_busy_total += a.port_busy;
        res.metrics.energy_total += a.energy;
        const auto sec = static_cast<std::size_t>(a.issued_at / kTicksPerSecond);
        if (sec < res.energy_by_second.size()) res.energy_by_second[sec] += a.energy;
        port_free = std::max(port_free, a.port_free_at());
        if (options.keep_actions) res.actions.push_back(std::move(a));
      }
      sync(t);
    }
    injector.inject_due(mem, t);
    sync(t);

    const auto sample = loop.step(cfg.workload.at(t));
    io_window.push_back(loop.io());
    const auto bits = sample.actuation.bits();
    for (int k = 0; k < 4; ++k) {
      digest ^= (bits >> (8 * k)) & 0xffU;
      digest *= 0x100000001b3ULL;
    }
    if (options.keep_trace) res.trace.push_back(sample);
    if (!res.first_divergence && sample.actuation != ctx.goldrun[static_cast<std::size_t>(t)].actuation) {
      res.first_divergence = t;
      if (options.stop_at_divergence) {
        ++t;
        break;
      }
    }
  }
  for (const auto& [a, since] : flipped) res.residences.push_back(t - since);

  res.applied = injector.applied();
  res.metrics.uncorrectable = policy.uncorrectable_events();
  std::vector<double> r(res.residences.begin(), res.residences.end());
  res.metrics.mean_residence = stats::mean(r);
  res.metrics.median_residence = stats::median(r);
  res.trace_digest = digest;
  if (auto* fp = dynamic_cast<fpscrub::FpScrubPolicy*>(&policy)) res.decisions = fp->decisions();
  return res;
}

// ---------------------------------------------------------------------------

namespace {

const fault::FaultEvent& event_by_id(const fault::FaultPlan& plan, std::uint32_t id) {
  for (const auto& e : plan.events)
    if (e.id == id) return e;
  throw std::logic_error("applied fault missing from plan");
}

bool replay_fails(const Context& ctx, const ExperimentConfig& cfg,
                  const env::EnvironmentTrace& environment, const fault::FaultPlan& plan,
                  std::span<const std::uint32_t> ids) {
  fault::FaultPlan sub{plan.seed, plan.weights, {}};
  for (const auto& e : plan.events)
    if (std::find(ids.begin(), ids.end(), e.id) != ids.end()) sub.events.push_back(e);
  auto policy = policy_for(cfg);
  SimOptions opt;
  opt.stop_at_divergence = true;
  return simulate(ctx, cfg, environment, sub, *policy, opt).first_divergence.has_value();
}

// Calls f on each k-subset of [0, n) in lexicographic order until f returns true.
template <class F>
bool for_each_combination(std::size_t n, std::size_t k, F&& f) {
  if (k > n) return false;
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    if (f(idx)) return true;
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
    if (i == 0) return false;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace

Attribution attribute_root_cause(const Context& ctx, const ExperimentConfig& cfg,
                                 const env::EnvironmentTrace& environment,
                                 const fault::FaultPlan& plan, Tick first_divergence,
                                 std::span<const fault::AppliedFault> applied) {
  Attribution out;
  std::optional<std::uint32_t> single;
  std::vector<std::uint32_t> candidates;  // sensitive, applied by the divergence
  for (const auto& a : applied) {
    ++out.isolated_replays;
    const auto& ev = event_by_id(plan, a.id);
    // a fault touching no sensitive bit replays as the goldrun
    if (!dut::touches_sensitive(ctx.map, ev.cells)) continue;
    const bool eligible = a.applied_at <= first_divergence;
    if (eligible) candidates.push_back(a.id);
    const std::uint32_t one[] = {a.id};
    if (replay_fails(ctx, cfg, environment, plan, one) && eligible && !single) single = a.id;
  }
  if (single) {
    out.cause = {RootCause::Kind::Single, {*single}};
    return out;
  }
  for (std::size_t k = 2; k <= 3; ++k) {
    std::vector<std::uint32_t> found;
    for_each_combination(candidates.size(), k, [&](const std::vector<std::size_t>& idx) {
      std::vector<std::uint32_t> ids;
      for (const auto i : idx) ids.push_back(candidates[i]);
      ++out.subset_replays;
      if (!replay_fails(ctx, cfg, environment, plan, ids)) return false;
      found = ids;
      return true;
    });
    if (!found.empty()) {
      out.cause = {RootCause::Kind::Interacting, found};
      return out;
    }
  }
  if (candidates.size() > 3) ++out.subset_replays;
  if (candidates.empty())
    for (const auto& a : applied)
      if (a.applied_at <= first_divergence) candidates.push_back(a.id);
  out.cause = {RootCause::Kind::Interacting, candidates};
  return out;
}

std::vector<LatencyEntry> measure_latency(const RootCause& cause, Tick first_divergence,
                                          std::span<const AppliedFaultInfo> applied,
                                          Tick high_threshold) {
  const AppliedFaultInfo* last = nullptr;
  for (const auto& a : applied)
    if (std::find(cause.ids.begin(), cause.ids.end(), a.id) != cause.ids.end())
      if (!last || a.applied_at >= last->applied_at) last = &a;
  if (!last) throw std::logic_error("causal fault was never applied");
  const Tick latency = first_divergence - last->applied_at;
  if (latency < 0) throw std::logic_error("causal fault applied after the divergence");
  return {{last->id, latency, latency > high_threshold}};
}

ExperimentRecord run_experiment(const ExperimentConfig& cfg, RunArtifacts* artifacts) {
  cfg.validate();
  return run_experiment(*context_for(cfg), cfg, artifacts);
}

ExperimentRecord run_experiment(const Context& ctx, const ExperimentConfig& cfg,
                                RunArtifacts* artifacts) {
  const auto environment = environment_for(cfg);
  const auto plan = plan_for(cfg, environment);
  auto policy = policy_for(cfg);
  SimOptions opt;
  opt.keep_trace = artifacts != nullptr;
  opt.keep_actions = artifacts != nullptr;
  auto sim = simulate(ctx, cfg, environment, plan, *policy, opt);

  ExperimentRecord rec;
  rec.config = cfg;
  rec.fingerprint = io::fingerprint(cfg);
  for (const auto& a : sim.applied) {
    const auto& ev = event_by_id(plan, a.id);
    rec.applied.push_back({ev.id, ev.trigger_time, a.applied_at, ev.kind, ev.center, ev.radius,
                           static_cast<std::uint32_t>(ev.cells.size()),
                           dut::touches_sensitive(ctx.map, ev.cells)});
  }
  rec.failure = sim.first_divergence.has_value();
  rec.first_divergence = sim.first_divergence;
  if (rec.failure && cfg.root_cause) {
    const auto attr = attribute_root_cause(ctx, cfg, environment, plan, *sim.first_divergence,
                                           sim.applied);
    rec.root_cause = attr.cause;
    rec.isolated_replays = attr.isolated_replays;
    rec.subset_replays = attr.subset_replays;
    rec.latencies = measure_latency(attr.cause, *sim.first_divergence, rec.applied,
                                    cfg.high_latency_threshold());
  }
  rec.scrub = sim.metrics;
  rec.energy_by_second = std::move(sim.energy_by_second);
  rec.residences = std::move(sim.residences);
  rec.trace_digest = sim.trace_digest;
  if (artifacts) {
    artifacts->trace = std::move(sim.trace);
    artifacts->actions = std::move(sim.actions);
    artifacts->decisions = std::move(sim.decisions);
  }
  return rec;
}

// ---------------------------------------------------------------------------

CampaignResult run_campaign(const CampaignConfig& cfg, const ProgressFn& progress,
                            const ArtifactSink& sink) {
  cfg.validate();
  CampaignResult out;
  out.policies = cfg.policies;
  out.records.assign(cfg.policies.size(), std::vector<ExperimentRecord>(cfg.experiments));
  const auto ctx = context_for(cfg.experiment_at(cfg.policies.front(), 0));

  const std::uint64_t total = cfg.policies.size() * cfg.experiments;
  std::atomic<std::uint64_t> next{0};
  std::atomic<std::uint64_t> done{0};
  std::mutex mu;
  std::exception_ptr error;
  auto worker = [&] {
    while (true) {
      const std::uint64_t job = next.fetch_add(1);
      if (job >= total) return;
      const std::size_t p = job / cfg.experiments;
      const std::uint64_t i = job % cfg.experiments;
      try {
        const auto ecfg = cfg.experiment_at(cfg.policies[p], i);
        RunArtifacts art;
        out.records[p][i] = run_experiment(*ctx, ecfg, sink ? &art : nullptr);
        if (sink) sink(out.records[p][i], art);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!error) error = std::current_exception();
        next.store(total);
        return;
      }
      const auto d = done.fetch_add(1) + 1;
      if (progress) {
        std::lock_guard lock(mu);
        progress(d, total);
      }
    }
  };
  unsigned n = cfg.workers ? cfg.workers : std::max(1U, std::thread::hardware_concurrency());
  n = static_cast<unsigned>(std::min<std::uint64_t>(n, total));
  std::vector<std::thread> pool;
  for (unsigned k = 1; k < n; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
  return out;
}

std::vector<PolicySummary> compare_policies(
    const std::vector<std::vector<ExperimentRecord>>& by_policy) {
  std::vector<PolicySummary> out;
  if (by_policy.empty()) return out;
  const auto& ref = by_policy.front();
  for (const auto& group : by_policy) {
    if (group.size() != ref.size())
      throw std::invalid_argument("compare_policies: policies ran different experiment counts");
    for (std::size_t i = 0; i < group.size(); ++i) {
      auto a = group[i].config;
      a.policy = ref[i].config.policy;
      if (!(a == ref[i].config))
        throw std::invalid_argument("compare_policies: experiment " + std::to_string(i) +
                                    " differs in more than the policy");
    }
  }
  auto failures = [](const std::vector<ExperimentRecord>& g) {
    std::vector<double> v;
    for (const auto& r : g) v.push_back(r.failure ? 1.0 : 0.0);
    return v;
  };
  auto energies = [](const std::vector<ExperimentRecord>& g) {
    std::vector<double> v;
    for (const auto& r : g) v.push_back(r.scrub.energy_total);
    return v;
  };
  const auto ref_fail = failures(ref);
  const auto ref_energy = energies(ref);
  for (const auto& group : by_policy) {
    PolicySummary s;
    s.policy = group.empty() ? "" : group.front().config.policy.label();
    std::uint64_t fails = 0, high = 0, with_latency = 0, singles = 0;
    std::vector<double> residences;
    for (const auto& r : group) {
      fails += r.failure;
      for (const auto x : r.residences) residences.push_back(static_cast<double>(x));
      s.energy_total += r.scrub.energy_total;
      s.port_busy_total += r.scrub.port_busy_total;
      for (const auto& l : r.latencies) {
        ++with_latency;
        high += l.high;
      }
      if (r.root_cause && r.root_cause->kind == RootCause::Kind::Single) ++singles;
    }
    s.failure = stats::wilson(fails, group.size());
    s.mean_residence = stats::mean(residences);
    s.median_residence = stats::median(residences);
    s.energy_mean = group.empty() ? 0.0 : s.energy_total / static_cast<double>(group.size());
    s.high_latency_fraction =
        with_latency ? static_cast<double>(high) / static_cast<double>(with_latency) : 0.0;
    s.single_cause_fraction = fails ? static_cast<double>(singles) / static_cast<double>(fails) : 0.0;
    const auto f = failures(group);
    const auto e = energies(group);
    std::vector<double> df(f.size()), de(e.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
      df[i] = f[i] - ref_fail[i];
      de[i] = e[i] - ref_energy[i];
    }
    s.failure_diff = stats::mean(df);
    s.failure_diff_ci = stats::paired_difference_ci(f, ref_fail);
    s.energy_diff = stats::mean(de);
    s.energy_diff_ci = stats::paired_difference_ci(e, ref_energy);
    out.push_back(s);
  }
  return out;
}

}  // namespace seuscrub::campaign
