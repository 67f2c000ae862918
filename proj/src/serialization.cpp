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

#include "seuscrub/serialization.hpp"

#include <charconv>
#include <cstdio>
#include <set>

#include "seuscrub/rng.hpp"

namespace seuscrub::io {

namespace {

using campaign::CampaignConfig;
using campaign::ExperimentConfig;
using campaign::ExperimentRecord;

// Reads one mapping, remembering which keys were consumed.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + "expected a mapping");
  }

  const json* find(const char* key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() || it->is_null() ? nullptr : &*it;
  }
  std::string sub(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  void number(const char* key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) throw ConfigError(sub(key) + ": expected a number");
      out = v->get<double>();
    }
  }
  template <class Int>
  void integer(const char* key, Int& out) {
    if (const json* v = find(key)) {
      if (v->is_number_float() && v->get<double>() == static_cast<double>(v->get<std::int64_t>())) {
        out = static_cast<Int>(v->get<std::int64_t>());
        return;
      }
      if (!v->is_number_integer()) throw ConfigError(sub(key) + ": expected an integer");
      if constexpr (std::is_unsigned_v<Int>) {
        if (v->is_number_unsigned()) {
          out = static_cast<Int>(v->get<std::uint64_t>());
          return;
        }
        if (v->get<std::int64_t>() < 0) throw ConfigError(sub(key) + ": must be >= 0");
      }
      out = static_cast<Int>(v->get<std::int64_t>());
    }
  }
  void boolean(const char* key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) throw ConfigError(sub(key) + ": expected true or false");
      out = v->get<bool>();
    }
  }
  void string(const char* key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) throw ConfigError(sub(key) + ": expected a string");
      out = v->get<std::string>();
    }
  }
  void q16(const char* key, Q16& out) {
    double d = out.to_double();
    number(key, d);
    out = Q16::from_double(d);
  }
  const json* array(const char* key) {
    const json* v = find(key);
    if (v && !v->is_array()) throw ConfigError(sub(key) + ": expected a list");
    return v;
  }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) throw ConfigError(sub(k.c_str()) + ": unknown key");
  }

 private:
  std::string where() const { return path_.empty() ? "" : path_ + ": "; }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <class F>
auto rethrow_as_config(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

json address(const memory::BitAddress& a) { return {{"frame", a.frame}, {"bit", a.bit}}; }

memory::BitAddress read_address(const json& j, const std::string& path) {
  Reader r(j, path);
  memory::BitAddress a;
  r.integer("frame", a.frame);
  r.integer("bit", a.bit);
  r.finish();
  return a;
}

json policy_list(const std::vector<scrub::PolicySpec>& ps) {
  json arr = json::array();
  for (const auto& p : ps) arr.push_back(p.label());
  return arr;
}

scrub::PolicySpec read_policy(const json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError(path + ": expected a policy string");
  return rethrow_as_config(path, [&] { return scrub::PolicySpec::parse(j.get<std::string>()); });
}

// -- experiment ------------------------------------------------------------

constexpr const char* kFingerprintSalt = campaign::kModelVersion;

json env_params_json(const env::EnvironmentParams& p) {
  return {{"temp_base", p.temp_base},         {"temp_coupling", p.temp_coupling},
          {"temp_lag", p.temp_lag},           {"temp_noise", p.temp_noise},
          {"flux_noise", p.flux_noise},       {"harsh_flux", p.harsh_flux},
          {"voltage_jitter", p.voltage_jitter}, {"dip_rate", p.dip_rate},
          {"dip_depth_min", p.dip_depth_min}, {"dip_depth_max", p.dip_depth_max}};
}

}  // namespace

json to_json(const ExperimentConfig& c) {
  json j;
  j["root_seed"] = c.root_seed;
  j["index"] = c.index;
  j["seed"] = c.seed;
  j["duration"] = c.duration;
  j["policy"] = c.policy.label();
  j["workload"] = {{"low", c.workload.low.to_double()},
                   {"high", c.workload.high.to_double()},
                   {"half_period", c.workload.half_period}};
  j["controller"] = {{"kp", c.controller.kp.to_double()},
                     {"ki", c.controller.ki.to_double()},
                     {"kd", c.controller.kd.to_double()},
                     {"u_min", c.controller.u_min.to_double()},
                     {"u_max", c.controller.u_max.to_double()}};
  j["plant"] = {{"a", c.plant.a.to_double()},
                {"b", c.plant.b.to_double()},
                {"initial_speed", c.plant.speed().to_double()}};
  j["device"] = {{"frame_count", c.device.frame_count}, {"frame_size", c.device.frame_size}};
  j["region"] = {{"frame_lo", c.region.frame_lo},
                 {"frame_hi", c.region.frame_hi},
                 {"bit_lo", c.region.bit_lo},
                 {"bit_hi", c.region.bit_hi}};
  json events = json::array();
  for (const auto& e : c.faults.events)
    events.push_back({{"t", e.t},
                      {"kind", fault::to_string(e.kind)},
                      {"frame", e.center.frame},
                      {"bit", e.center.bit},
                      {"radius", e.radius}});
  j["faults"] = {{"mode", campaign::to_string(c.faults.mode)},
                 {"count", c.faults.count},
                 {"weights",
                  {{"sbe", c.faults.weights.sbe},
                   {"double_adjacent", c.faults.weights.double_adjacent},
                   {"mbe", c.faults.weights.mbe}}},
                 {"mbe_radius_max", c.faults.mbe_radius_max},
                 {"base_rate", c.faults.base_rate},
                 {"events", events}};
  const auto& mp = c.map.params;
  json overrides = json::array();
  for (const auto& o : c.map.overrides) {
    json x = {{"frame", o.bit.frame}, {"bit", o.bit.bit}, {"element", o.element}};
    if (o.group) x["group"] = *o.group;
    overrides.push_back(x);
  }
  j["map"] = {{"unused", mp.unused},
              {"non_sensitive", mp.non_sensitive},
              {"sensitive", mp.sensitive},
              {"pair_fraction", mp.pair_fraction},
              {"weights",
               {{"kp_bit", mp.weights.kp_bit},
                {"ki_bit", mp.weights.ki_bit},
                {"kd_bit", mp.weights.kd_bit},
                {"acc_stuck", mp.weights.acc_stuck},
                {"err_path_stuck_low", mp.weights.err_path_stuck_low},
                {"out_force", mp.weights.out_force},
                {"routing_swap", mp.weights.routing_swap}}},
              {"overrides", overrides}};
  json bursts = json::array();
  for (const auto& b : c.environment.profile.bursts)
    bursts.push_back({{"start", b.start}, {"end", b.end}, {"multiplier", b.multiplier}});
  j["environment"] = {{"profile", env::to_string(c.environment.profile.kind)},
                      {"bursts", bursts},
                      {"cadence", c.environment.cadence},
                      {"params", env_params_json(c.environment.params)}};
  j["ports"] = {{"t_frame_read", c.ports.t_frame_read},
                {"t_frame_write", c.ports.t_frame_write},
                {"energy_read", c.ports.energy_read},
                {"energy_write", c.ports.energy_write}};
  const auto& f = c.fpscrub;
  json fp = {{"w_f", f.w_f},         {"w_t", f.w_t},
             {"w_v", f.w_v},         {"alpha", f.alpha},
             {"p_min", f.p_min},     {"p_max", f.p_max},
             {"theta_low", f.theta_low}, {"theta_high", f.theta_high},
             {"flux_ref", f.flux_ref},   {"t_base", f.t_base},
             {"t_span", f.t_span},   {"cooldown", f.cooldown},
             {"io_monitor", f.io_bounds.has_value()}};
  const auto b = f.io_bounds.value_or(fpscrub::IoBounds{});
  fp["io_bounds"] = {{"input_lo", b.input_lo},
                     {"input_hi", b.input_hi},
                     {"output_lo", b.output_lo},
                     {"output_hi", b.output_hi}};
  j["fpscrub"] = fp;
  j["compute_fraction"] = c.compute_fraction;
  j["latency_threshold"] = c.latency_threshold;
  j["root_cause"] = c.root_cause;
  return j;
}

namespace {

ExperimentConfig read_experiment(const json& j, const std::string& path, bool with_identity) {
  ExperimentConfig c;
  Reader r(j, path);
  if (with_identity) {
    r.integer("root_seed", c.root_seed);
    r.integer("index", c.index);
    r.integer("seed", c.seed);
    if (const json* p = r.find("policy")) c.policy = read_policy(*p, r.sub("policy"));
  }
  r.integer("duration", c.duration);
  if (const json* w = r.find("workload")) {
    Reader x(*w, r.sub("workload"));
    x.q16("low", c.workload.low);
    x.q16("high", c.workload.high);
    x.integer("half_period", c.workload.half_period);
    x.finish();
  }
  if (const json* w = r.find("controller")) {
    Reader x(*w, r.sub("controller"));
    x.q16("kp", c.controller.kp);
    x.q16("ki", c.controller.ki);
    x.q16("kd", c.controller.kd);
    x.q16("u_min", c.controller.u_min);
    x.q16("u_max", c.controller.u_max);
    x.finish();
  }
  if (const json* w = r.find("plant")) {
    Reader x(*w, r.sub("plant"));
    double a = c.plant.a.to_double(), b = c.plant.b.to_double();
    double v0 = c.plant.speed().to_double();
    x.number("a", a);
    x.number("b", b);
    x.number("initial_speed", v0);
    x.finish();
    c.plant.a = dut::Coeff30::from_double(a);
    c.plant.b = dut::Coeff30::from_double(b);
    c.plant.set_speed(Q16::from_double(v0));
  }
  if (const json* w = r.find("device")) {
    Reader x(*w, r.sub("device"));
    x.integer("frame_count", c.device.frame_count);
    x.integer("frame_size", c.device.frame_size);
    x.finish();
  }
  bool region_bits_given = false;
  if (const json* w = r.find("region")) {
    Reader x(*w, r.sub("region"));
    x.integer("frame_lo", c.region.frame_lo);
    x.integer("frame_hi", c.region.frame_hi);
    x.integer("bit_lo", c.region.bit_lo);
    region_bits_given = w->contains("bit_hi");
    x.integer("bit_hi", c.region.bit_hi);
    x.finish();
  }
  if (!region_bits_given) c.region.bit_hi = c.device.frame_size;
  if (const json* w = r.find("faults")) {
    Reader x(*w, r.sub("faults"));
    std::string mode = campaign::to_string(c.faults.mode);
    x.string("mode", mode);
    c.faults.mode = rethrow_as_config(x.sub("mode"), [&] { return campaign::fault_mode_from_string(mode); });
    x.integer("count", c.faults.count);
    if (const json* ww = x.find("weights")) {
      Reader y(*ww, x.sub("weights"));
      y.integer("sbe", c.faults.weights.sbe);
      y.integer("double_adjacent", c.faults.weights.double_adjacent);
      y.integer("mbe", c.faults.weights.mbe);
      y.finish();
    }
    x.integer("mbe_radius_max", c.faults.mbe_radius_max);
    x.number("base_rate", c.faults.base_rate);
    if (const json* ev = x.array("events")) {
      std::size_t i = 0;
      for (const auto& e : *ev) {
        const std::string p = x.sub("events") + "[" + std::to_string(i++) + "]";
        Reader y(e, p);
        campaign::ExplicitFault f;
        std::string kind = fault::to_string(f.kind);
        y.integer("t", f.t);
        y.string("kind", kind);
        f.kind = rethrow_as_config(p + ".kind", [&] { return fault::fault_kind_from_string(kind); });
        y.integer("frame", f.center.frame);
        y.integer("bit", f.center.bit);
        y.integer("radius", f.radius);
        y.finish();
        c.faults.events.push_back(f);
      }
    }
    x.finish();
  }
  if (const json* w = r.find("map")) {
    Reader x(*w, r.sub("map"));
    auto& mp = c.map.params;
    x.number("unused", mp.unused);
    x.number("non_sensitive", mp.non_sensitive);
    x.number("sensitive", mp.sensitive);
    x.number("pair_fraction", mp.pair_fraction);
    if (const json* ww = x.find("weights")) {
      Reader y(*ww, x.sub("weights"));
      y.number("kp_bit", mp.weights.kp_bit);
      y.number("ki_bit", mp.weights.ki_bit);
      y.number("kd_bit", mp.weights.kd_bit);
      y.number("acc_stuck", mp.weights.acc_stuck);
      y.number("err_path_stuck_low", mp.weights.err_path_stuck_low);
      y.number("out_force", mp.weights.out_force);
      y.number("routing_swap", mp.weights.routing_swap);
      y.finish();
    }
    if (const json* ov = x.array("overrides")) {
      std::size_t i = 0;
      for (const auto& e : *ov) {
        const std::string p = x.sub("overrides") + "[" + std::to_string(i++) + "]";
        Reader y(e, p);
        campaign::MapOverride o;
        y.integer("frame", o.bit.frame);
        y.integer("bit", o.bit.bit);
        y.string("element", o.element);
        if (y.find("group")) {
          std::uint32_t g = 0;
          y.integer("group", g);
          o.group = g;
        }
        y.finish();
        c.map.overrides.push_back(o);
      }
    }
    x.finish();
  }
  if (const json* w = r.find("environment")) {
    Reader x(*w, r.sub("environment"));
    std::string profile = env::to_string(c.environment.profile.kind);
    x.string("profile", profile);
    c.environment.profile.kind =
        rethrow_as_config(x.sub("profile"), [&] { return env::profile_from_string(profile); });
    if (const json* bs = x.array("bursts")) {
      std::size_t i = 0;
      for (const auto& e : *bs) {
        Reader y(e, x.sub("bursts") + "[" + std::to_string(i++) + "]");
        env::Burst b;
        y.integer("start", b.start);
        y.integer("end", b.end);
        y.number("multiplier", b.multiplier);
        y.finish();
        c.environment.profile.bursts.push_back(b);
      }
    }
    x.integer("cadence", c.environment.cadence);
    if (const json* pp = x.find("params")) {
      Reader y(*pp, x.sub("params"));
      auto& p = c.environment.params;
      y.number("temp_base", p.temp_base);
      y.number("temp_coupling", p.temp_coupling);
      y.number("temp_lag", p.temp_lag);
      y.number("temp_noise", p.temp_noise);
      y.number("flux_noise", p.flux_noise);
      y.number("harsh_flux", p.harsh_flux);
      y.number("voltage_jitter", p.voltage_jitter);
      y.number("dip_rate", p.dip_rate);
      y.number("dip_depth_min", p.dip_depth_min);
      y.number("dip_depth_max", p.dip_depth_max);
      y.finish();
    }
    x.finish();
  }
  if (const json* w = r.find("ports")) {
    Reader x(*w, r.sub("ports"));
    x.integer("t_frame_read", c.ports.t_frame_read);
    x.integer("t_frame_write", c.ports.t_frame_write);
    x.number("energy_read", c.ports.energy_read);
    x.number("energy_write", c.ports.energy_write);
    x.finish();
  }
  if (const json* w = r.find("fpscrub")) {
    Reader x(*w, r.sub("fpscrub"));
    auto& f = c.fpscrub;
    x.number("w_f", f.w_f);
    x.number("w_t", f.w_t);
    x.number("w_v", f.w_v);
    x.number("alpha", f.alpha);
    x.integer("p_min", f.p_min);
    x.integer("p_max", f.p_max);
    x.number("theta_low", f.theta_low);
    x.number("theta_high", f.theta_high);
    x.number("flux_ref", f.flux_ref);
    x.number("t_base", f.t_base);
    x.number("t_span", f.t_span);
    x.integer("cooldown", f.cooldown);
    bool monitor = f.io_bounds.has_value();
    x.boolean("io_monitor", monitor);
    fpscrub::IoBounds b = f.io_bounds.value_or(fpscrub::IoBounds{});
    if (const json* bb = x.find("io_bounds")) {
      Reader y(*bb, x.sub("io_bounds"));
      y.number("input_lo", b.input_lo);
      y.number("input_hi", b.input_hi);
      y.number("output_lo", b.output_lo);
      y.number("output_hi", b.output_hi);
      y.finish();
    }
    f.io_bounds = monitor ? std::optional(b) : std::nullopt;
    x.finish();
  }
  r.number("compute_fraction", c.compute_fraction);
  r.integer("latency_threshold", c.latency_threshold);
  r.boolean("root_cause", c.root_cause);
  r.finish();
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path + "." + e.what());
  }
  return c;
}

}  // namespace

ExperimentConfig experiment_from_json(const json& j) {
  return read_experiment(j, "config", true);
}

json to_json(const CampaignConfig& c) {
  json e = to_json(c.experiment);
  for (const char* k : {"root_seed", "index", "seed", "policy"}) e.erase(k);
  return {{"seed", c.root_seed},       {"experiments", c.experiments},
          {"workers", c.workers},      {"output", c.output},
          {"policies", policy_list(c.policies)},
          {"write_logs", c.write_logs}, {"experiment", e}};
}

CampaignConfig campaign_from_json(const json& j) {
  CampaignConfig c;
  Reader r(j, "");
  r.integer("seed", c.root_seed);
  r.integer("experiments", c.experiments);
  r.integer("workers", c.workers);
  r.string("output", c.output);
  if (const json* ps = r.array("policies")) {
    c.policies.clear();
    std::size_t i = 0;
    for (const auto& p : *ps) c.policies.push_back(read_policy(p, "policies[" + std::to_string(i++) + "]"));
  }
  r.boolean("write_logs", c.write_logs);
  if (const json* e = r.find("experiment")) {
    c.experiment = read_experiment(*e, "experiment", false);
  }
  r.finish();
  c.experiment.root_seed = c.root_seed;
  c.experiment.index = 0;
  c.experiment.seed = 0;
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return c;
}

// -- records -----------------------------------------------------------------

namespace {

std::string cause_kind(campaign::RootCause::Kind k) {
  return k == campaign::RootCause::Kind::Single ? "Single" : "Interacting";
}

}  // namespace

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t parse_hex64(const std::string& s) {
  std::uint64_t v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v, 16);
  if (s.size() != 16 || r.ec != std::errc{} || r.ptr != s.data() + s.size())
    throw ConfigError("expected a 16-digit hex value, got '" + s + "'");
  return v;
}

json to_json(const ExperimentRecord& rec) {
  json j;
  j["schema_version"] = rec.schema_version;
  j["model_version"] = rec.model_version;
  j["fingerprint"] = hex64(rec.fingerprint);
  j["root_seed"] = rec.config.root_seed;
  j["derived"] = rec.derived;
  j["config"] = to_json(rec.config);
  json applied = json::array();
  for (const auto& a : rec.applied)
    applied.push_back({{"id", a.id},
                       {"trigger_time", a.trigger_time},
                       {"applied_at", a.applied_at},
                       {"kind", fault::to_string(a.kind)},
                       {"center", address(a.center)},
                       {"radius", a.radius},
                       {"cells", a.cells},
                       {"sensitive", a.sensitive}});
  j["applied_faults"] = applied;
  j["outcome"] = rec.failure ? "Failure" : "NoFailure";
  j["first_divergence"] = rec.first_divergence ? json(*rec.first_divergence) : json(nullptr);
  if (rec.root_cause)
    j["root_cause"] = {{"kind", cause_kind(rec.root_cause->kind)}, {"ids", rec.root_cause->ids}};
  else
    j["root_cause"] = nullptr;
  j["isolated_replays"] = rec.isolated_replays;
  j["subset_replays"] = rec.subset_replays;
  json lat = json::array();
  for (const auto& l : rec.latencies)
    lat.push_back({{"fault_id", l.fault_id}, {"latency", l.latency}, {"class", l.high ? "High" : "Low"}});
  j["latencies"] = lat;
  const auto& m = rec.scrub;
  j["scrub"] = {{"total_actions", m.total_actions},
                {"frames_written", m.frames_written},
                {"port_busy_total", m.port_busy_total},
                {"energy_total", m.energy_total},
                {"uncorrectable", m.uncorrectable},
                {"mean_residence", m.mean_residence},
                {"median_residence", m.median_residence}};
  j["energy_by_second"] = rec.energy_by_second;
  j["residences"] = rec.residences;
  j["trace_digest"] = hex64(rec.trace_digest);
  return j;
}

ExperimentRecord record_from_json(const json& j) {
  ExperimentRecord rec;
  Reader r(j, "record");
  r.integer("schema_version", rec.schema_version);
  r.string("model_version", rec.model_version);
  std::string fp;
  r.string("fingerprint", fp);
  rec.fingerprint = parse_hex64(fp);
  std::uint64_t root = 0;
  r.integer("root_seed", root);
  r.boolean("derived", rec.derived);
  const json* cfg = r.find("config");
  if (!cfg) throw ConfigError("record.config: missing");
  rec.config = experiment_from_json(*cfg);
  if (root != rec.config.root_seed)
    throw ConfigError("record.root_seed: does not match config.root_seed");
  if (const json* arr = r.array("applied_faults")) {
    for (const auto& a : *arr) {
      Reader x(a, "record.applied_faults");
      campaign::AppliedFaultInfo info;
      std::string kind;
      x.integer("id", info.id);
      x.integer("trigger_time", info.trigger_time);
      x.integer("applied_at", info.applied_at);
      x.string("kind", kind);
      info.kind = fault::fault_kind_from_string(kind);
      if (const json* c = x.find("center")) info.center = read_address(*c, "record.applied_faults.center");
      x.integer("radius", info.radius);
      x.integer("cells", info.cells);
      x.boolean("sensitive", info.sensitive);
      x.finish();
      rec.applied.push_back(info);
    }
  }
  std::string outcome;
  r.string("outcome", outcome);
  if (outcome != "Failure" && outcome != "NoFailure")
    throw ConfigError("record.outcome: expected Failure or NoFailure");
  rec.failure = outcome == "Failure";
  if (r.find("first_divergence")) {
    Tick t = 0;
    r.integer("first_divergence", t);
    rec.first_divergence = t;
  }
  if (const json* rc = r.find("root_cause")) {
    Reader x(*rc, "record.root_cause");
    campaign::RootCause cause;
    std::string kind;
    x.string("kind", kind);
    if (kind != "Single" && kind != "Interacting")
      throw ConfigError("record.root_cause.kind: expected Single or Interacting");
    cause.kind = kind == "Single" ? campaign::RootCause::Kind::Single
                                  : campaign::RootCause::Kind::Interacting;
    if (const json* ids = x.array("ids")) cause.ids = ids->get<std::vector<std::uint32_t>>();
    x.finish();
    rec.root_cause = cause;
  }
  r.integer("isolated_replays", rec.isolated_replays);
  r.integer("subset_replays", rec.subset_replays);
  if (const json* arr = r.array("latencies")) {
    for (const auto& l : *arr) {
      Reader x(l, "record.latencies");
      campaign::LatencyEntry e;
      std::string cls;
      x.integer("fault_id", e.fault_id);
      x.integer("latency", e.latency);
      x.string("class", cls);
      e.high = cls == "High";
      x.finish();
      rec.latencies.push_back(e);
    }
  }
  if (const json* s = r.find("scrub")) {
    Reader x(*s, "record.scrub");
    auto& m = rec.scrub;
    x.integer("total_actions", m.total_actions);
    x.integer("frames_written", m.frames_written);
    x.integer("port_busy_total", m.port_busy_total);
    x.number("energy_total", m.energy_total);
    x.integer("uncorrectable", m.uncorrectable);
    x.number("mean_residence", m.mean_residence);
    x.number("median_residence", m.median_residence);
    x.finish();
  }
  if (const json* e = r.array("energy_by_second")) rec.energy_by_second = e->get<std::vector<double>>();
  if (const json* e = r.array("residences")) rec.residences = e->get<std::vector<Tick>>();
  std::string digest;
  r.string("trace_digest", digest);
  rec.trace_digest = parse_hex64(digest);
  r.finish();
  return rec;
}

std::uint64_t fingerprint(const ExperimentConfig& cfg) {
  return fnv1a64(to_json(cfg).dump(), fnv1a64(kFingerprintSalt));
}

std::uint64_t fingerprint(const CampaignConfig& cfg) {
  json j = to_json(cfg);
  // where results go and how fast they are produced does not change them
  j.erase("output");
  j.erase("workers");
  j.erase("write_logs");
  return fnv1a64(j.dump(), fnv1a64(kFingerprintSalt));
}

}  // namespace seuscrub::io
