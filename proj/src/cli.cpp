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

#include "seuscrub/cli.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <yaml-cpp/yaml.h>

#include "seuscrub/serialization.hpp"

namespace seuscrub::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// -- YAML <-> JSON -----------------------------------------------------------

json scalar_to_json(const YAML::Node& n) {
  const std::string& s = n.Scalar();
  if (n.Tag() == "!") return s;  // quoted
  if (s == "true" || s == "True" || s == "TRUE") return true;
  if (s == "false" || s == "False" || s == "FALSE") return false;
  if (s.empty() || s == "~" || s == "null" || s == "Null" || s == "NULL") return nullptr;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  if (*b == '+') ++b;
  std::int64_t i = 0;
  if (auto r = std::from_chars(b, e, i); r.ec == std::errc{} && r.ptr == e) return i;
  std::uint64_t u = 0;
  if (auto r = std::from_chars(b, e, u); r.ec == std::errc{} && r.ptr == e) return u;
  double d = 0;
  if (auto r = std::from_chars(b, e, d); r.ec == std::errc{} && r.ptr == e) return d;
  return s;
}

json yaml_to_json(const YAML::Node& n, const std::string& path) {
  switch (n.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
      return nullptr;
    case YAML::NodeType::Scalar:
      return scalar_to_json(n);
    case YAML::NodeType::Sequence: {
      json arr = json::array();
      std::size_t i = 0;
      for (const auto& x : n) arr.push_back(yaml_to_json(x, path + "[" + std::to_string(i++) + "]"));
      return arr;
    }
    case YAML::NodeType::Map: {
      json obj = json::object();
      for (const auto& kv : n) {
        const auto key = kv.first.Scalar();
        const std::string sub = path.empty() ? key : path + "." + key;
        if (obj.contains(key)) throw io::ConfigError(sub + ": duplicate key");
        obj[key] = yaml_to_json(kv.second, sub);
      }
      return obj;
    }
  }
  return nullptr;
}

std::string yaml_scalar(const json& v) {
  if (v.is_string()) return v.dump();  // JSON strings are valid double-quoted YAML
  if (v.is_number_float()) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof(buf), v.get<double>());
    return std::string(buf, r.ptr);
  }
  return v.dump();
}

std::string flow(const json& v) {
  if (v.is_object()) {
    std::string s = "{";
    bool first = true;
    for (const auto& [k, x] : v.items()) {
      s += (first ? "" : ", ") + k + ": " + flow(x);
      first = false;
    }
    return s + "}";
  }
  if (v.is_array()) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + flow(v[i]);
    return s + "]";
  }
  return yaml_scalar(v);
}

const std::map<std::string, std::string>& comments() {
  static const std::map<std::string, std::string> c = {
      {"seed", "root seed; every other seed is derived from it"},
      {"experiments", "experiments per policy"},
      {"workers", "worker threads, 0 = one per core"},
      {"output", "result directory"},
      {"policies",
       "none | blind_full:P | blind_partial:P[:lo-hi] | readback:P | secded:P |\n"
       "budgeted:W:K | fpscrub   (P, W in ticks)"},
      {"write_logs", "per-experiment trace, scrub and decision logs"},
      {"experiment.duration", "ticks (1 tick = 1 ms)"},
      {"experiment.workload", "square-wave speed setpoint"},
      {"experiment.controller", "PID gains, ki per tick; output clamp"},
      {"experiment.plant", "v[k+1] = a*v[k] + b*u[k]"},
      {"experiment.device", "configuration memory geometry"},
      {"experiment.region", "frames/bits of the protected module; faults land here"},
      {"experiment.faults.mode", "none | uniform | poisson | explicit"},
      {"experiment.faults.count", "uniform mode: upsets per experiment"},
      {"experiment.faults.base_rate", "poisson mode: upsets per tick at flux 1.0"},
      {"experiment.faults.events", "explicit mode: {t, kind, frame, bit, radius}"},
      {"experiment.map", "bit classes of the region; fractions sum to 1"},
      {"experiment.map.pair_fraction", "share of ERR_PATH_STUCK_LOW bits bound as redundant pairs"},
      {"experiment.map.overrides",
       "{frame, bit, element[, group]}; element UNUSED, NON_SENSITIVE or a corruption"},
      {"experiment.environment.profile", "benign | harsh | episodic"},
      {"experiment.environment.bursts", "episodic only: {start, end, multiplier}"},
      {"experiment.environment.cadence", "ticks between sensor samples"},
      {"experiment.ports", "configuration port cost per frame"},
      {"experiment.fpscrub", "hazard weights, EWMA factor, period bounds and thresholds"},
      {"experiment.fpscrub.io_monitor", "scrub immediately on out-of-range DUT I/O"},
      {"experiment.compute_fraction", "share of each loop period the controller computes"},
      {"experiment.latency_threshold", "High latency above this many ticks, 0 = half period"},
      {"experiment.root_cause", "isolation replays for failing experiments"},
  };
  return c;
}

void emit_yaml(const json& obj, int indent, const std::string& path, bool commented,
               std::ostream& o) {
  const std::string pad(static_cast<std::size_t>(indent), ' ');
  for (const auto& [k, v] : obj.items()) {
    const std::string sub = path.empty() ? k : path + "." + k;
    if (commented) {
      if (const auto it = comments().find(sub); it != comments().end()) {
        std::istringstream lines(it->second);
        std::string line;
        while (std::getline(lines, line)) o << pad << "# " << line << '\n';
      }
    }
    if (v.is_object() && !v.empty()) {
      o << pad << k << ":\n";
      emit_yaml(v, indent + 2, sub, commented, o);
    } else if (v.is_array() && !v.empty() && (v[0].is_object() || v[0].is_array())) {
      o << pad << k << ":\n";
      for (const auto& x : v) o << pad << "  - " << flow(x) << '\n';
    } else {
      o << pad << k << ": " << flow(v) << '\n';
    }
  }
}

// -- files ---------------------------------------------------------------------

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot write " + p.string());
  out << text;
  if (!out) throw IoError("write failed: " + p.string());
}

void make_dirs(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec || !fs::is_directory(p)) throw IoError("cannot create directory " + p.string());
}

std::string preamble(std::uint64_t root_seed, std::uint64_t fp) {
  return "# root_seed=" + std::to_string(root_seed) + " fingerprint=" + io::hex64(fp) +
         " model=" + campaign::kModelVersion + "\n";
}

std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

std::string record_name(std::uint64_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "exp_%06llu", static_cast<unsigned long long>(index));
  return buf;
}

template <class F>
int guarded(std::ostream& err, F&& f) {
  try {
    return f();
  } catch (const io::ConfigError& e) {
    err << "invalid config: " << e.what() << '\n';
    return kInvalidConfig;
  } catch (const YAML::BadFile& e) {
    err << "i/o error: " << e.what() << '\n';
    return kIoFailure;
  } catch (const YAML::Exception& e) {
    err << "invalid config: " << e.what() << '\n';
    return kInvalidConfig;
  } catch (const nlohmann::json::exception& e) {
    err << "invalid input: " << e.what() << '\n';
    return kInvalidConfig;
  } catch (const std::invalid_argument& e) {
    err << "invalid config: " << e.what() << '\n';
    return kInvalidConfig;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kIoFailure;
  } catch (const fs::filesystem_error& e) {
    err << "i/o error: " << e.what() << '\n';
    return kIoFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailed;
  }
}

}  // namespace

campaign::CampaignConfig parse_campaign(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw io::ConfigError(std::string("malformed YAML: ") + e.what());
  }
  if (root.IsNull()) return io::campaign_from_json(json::object());
  return io::campaign_from_json(yaml_to_json(root, ""));
}

campaign::CampaignConfig load_campaign(const fs::path& path) {
  return parse_campaign(read_file(path));
}

std::string emit_campaign_yaml(const campaign::CampaignConfig& cfg, bool commented) {
  std::ostringstream o;
  emit_yaml(io::to_json(cfg), 0, "", commented, o);
  return o.str();
}

void apply_overrides(campaign::CampaignConfig& cfg, const RunOverrides& o) {
  if (o.seed) cfg.root_seed = *o.seed;
  if (o.workers) cfg.workers = *o.workers;
  if (o.out) cfg.output = *o.out;
  if (o.experiments) cfg.experiments = *o.experiments;
  if (!o.policies.empty()) {
    cfg.policies.clear();
    for (const auto& p : o.policies) {
      try {
        cfg.policies.push_back(scrub::PolicySpec::parse(p));
      } catch (const std::invalid_argument& e) {
        throw io::ConfigError(std::string("--policy: ") + e.what());
      }
    }
  }
  if (o.profile) {
    try {
      auto& prof = cfg.experiment.environment.profile;
      prof.kind = env::profile_from_string(*o.profile);
      if (prof.kind != env::ProfileKind::Episodic) prof.bursts.clear();
    } catch (const std::invalid_argument& e) {
      throw io::ConfigError(std::string("--profile: ") + e.what());
    }
  }
  cfg.experiment.root_seed = cfg.root_seed;
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw io::ConfigError(e.what());
  }
}

std::string policy_slug(const std::string& label) {
  std::string s = label;
  for (auto& c : s)
    if (c == ':') c = '_';
  return s;
}

std::string aggregate_csv(const campaign::CampaignConfig& cfg,
                          const campaign::CampaignResult& result) {
  std::ostringstream o;
  o << preamble(cfg.root_seed, io::fingerprint(cfg));
  o << "policy,index,seed,fingerprint,outcome,first_divergence,root_cause,cause_ids,latency,"
       "latency_class,applied_faults,sensitive_faults,total_actions,frames_written,port_busy,"
       "energy,mean_residence,uncorrectable,trace_digest\n";
  for (std::size_t p = 0; p < result.records.size(); ++p) {
    for (const auto& r : result.records[p]) {
      std::string ids, lat, cls, cause;
      if (r.root_cause) {
        cause = r.root_cause->kind == campaign::RootCause::Kind::Single ? "Single" : "Interacting";
        for (std::size_t i = 0; i < r.root_cause->ids.size(); ++i)
          ids += (i ? ";" : "") + std::to_string(r.root_cause->ids[i]);
      }
      if (!r.latencies.empty()) {
        lat = std::to_string(r.latencies.front().latency);
        cls = r.latencies.front().high ? "High" : "Low";
      }
      std::size_t sensitive = 0;
      for (const auto& a : r.applied) sensitive += a.sensitive;
      o << r.config.policy.label() << ',' << r.config.index << ',' << r.config.seed << ','
        << io::hex64(r.fingerprint) << ',' << (r.failure ? "Failure" : "NoFailure") << ','
        << (r.first_divergence ? std::to_string(*r.first_divergence) : "") << ',' << cause
        << ',' << ids << ',' << lat << ',' << cls << ',' << r.applied.size() << ','
        << sensitive << ',' << r.scrub.total_actions << ',' << r.scrub.frames_written << ','
        << r.scrub.port_busy_total << ',' << fmt(r.scrub.energy_total) << ','
        << fmt(r.scrub.mean_residence) << ',' << r.scrub.uncorrectable << ','
        << io::hex64(r.trace_digest) << '\n';
    }
  }
  return o.str();
}

// -- run -------------------------------------------------------------------------

int cmd_run(const std::optional<fs::path>& config, const RunOverrides& overrides,
            std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    auto cfg = config ? load_campaign(*config) : parse_campaign("");
    apply_overrides(cfg, overrides);
    const fs::path dir = cfg.output;
    const auto fp = io::fingerprint(cfg);
    make_dirs(dir);
    write_file(dir / "effective_config.yaml",
               preamble(cfg.root_seed, fp) + emit_campaign_yaml(cfg, false));
    for (const auto& p : cfg.policies) {
      make_dirs(dir / "records" / policy_slug(p.label()));
      if (cfg.write_logs) make_dirs(dir / "logs" / policy_slug(p.label()));
    }
    const auto ctx = campaign::context_for(cfg.experiment_at(cfg.policies.front(), 0));
    auto sink = [&](const campaign::ExperimentRecord& rec, const campaign::RunArtifacts& art) {
      const auto slug = policy_slug(rec.config.policy.label());
      const auto name = record_name(rec.config.index);
      write_file(dir / "records" / slug / (name + ".json"), io::to_json(rec).dump(2) + "\n");
      if (!cfg.write_logs) return;
      const auto pre = preamble(rec.config.root_seed, rec.fingerprint);
      const fs::path logs = dir / "logs" / slug;
      try {
        dut::write_trace_csv(logs / (name + "_trace.csv"), art.trace, &ctx->goldrun, pre);
      } catch (const std::runtime_error& e) {
        throw IoError(e.what());
      }
      write_file(logs / (name + "_scrub.csv"), pre + scrub::scrub_log_csv(art.actions));
      if (rec.config.policy.kind == scrub::PolicyKind::FpScrub)
        write_file(logs / (name + "_decisions.csv"), pre + fpscrub::decision_log_csv(art.decisions));
    };
    const auto result = campaign::run_campaign(cfg, {}, sink);
    write_file(dir / "aggregate.csv", aggregate_csv(cfg, result));
    out << "campaign " << io::hex64(fp) << " root_seed=" << cfg.root_seed << ": "
        << cfg.experiments << " experiments x " << cfg.policies.size() << " policies -> "
        << dir.string() << '\n';
    const auto table = campaign::compare_policies(result.records);
    for (const auto& s : table)
      out << "  " << s.policy << ": failure " << s.failure.successes << "/" << s.failure.trials
          << " = " << fmt(s.failure.value) << " [" << fmt(s.failure.ci.lo) << ", "
          << fmt(s.failure.ci.hi) << "], energy " << fmt(s.energy_total) << '\n';
    return kOk;
  });
}

// -- replay ------------------------------------------------------------------------

namespace {

void diff_json(const json& a, const json& b, const std::string& path, std::vector<std::string>& out) {
  if (a.is_object() && b.is_object()) {
    std::set<std::string> keys;
    for (const auto& [k, v] : a.items()) keys.insert(k);
    for (const auto& [k, v] : b.items()) keys.insert(k);
    for (const auto& k : keys) {
      const std::string sub = path.empty() ? k : path + "." + k;
      if (!a.contains(k) || !b.contains(k))
        out.push_back(sub);
      else
        diff_json(a[k], b[k], sub, out);
    }
    return;
  }
  if (a != b) out.push_back(path);
}

}  // namespace

int cmd_replay(const fs::path& record, const std::optional<std::string>& policy,
               const std::optional<fs::path>& output, std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() -> int {
    const json stored_json = json::parse(read_file(record));
    const auto stored = io::record_from_json(stored_json);
    if (stored.model_version != campaign::kModelVersion) {
      err << "fingerprint mismatch: record made by " << stored.model_version << ", this build is "
          << campaign::kModelVersion << '\n';
      return kFailed;
    }
    const auto expect = io::fingerprint(stored.config);
    if (expect != stored.fingerprint) {
      err << "fingerprint mismatch: record says " << io::hex64(stored.fingerprint)
          << ", its config hashes to " << io::hex64(expect) << '\n';
      return kFailed;
    }
    auto cfg = stored.config;
    const bool derived = policy.has_value();
    if (derived) {
      cfg.policy = scrub::PolicySpec::parse(*policy);
      cfg.validate();
    }
    auto rec = campaign::run_experiment(cfg);
    rec.derived = derived || stored.derived;
    const json fresh = io::to_json(rec);
    if (output) write_file(*output, fresh.dump(2) + "\n");
    if (derived) {
      out << "derived record (policy " << cfg.policy.label() << "), not a verification: "
          << (rec.failure ? "Failure" : "NoFailure") << '\n';
      if (!output) out << fresh.dump(2) << '\n';
      return kOk;
    }
    std::vector<std::string> diffs;
    diff_json(stored_json, fresh, "", diffs);
    if (!diffs.empty()) {
      err << "replay mismatch in " << diffs.size() << " field(s):";
      for (const auto& d : diffs) err << ' ' << d;
      err << '\n';
      return kFailed;
    }
    out << "verified " << record.string() << " (" << io::hex64(rec.fingerprint) << ")\n";
    return kOk;
  });
}

// -- summarize -----------------------------------------------------------------------

namespace {

struct Campaign {
  std::uint64_t root_seed = 0;
  std::vector<std::string> policies;  // first-seen order
  std::map<std::string, std::map<std::uint64_t, campaign::ExperimentRecord>> records;
};

std::pair<std::uint64_t, std::uint64_t> read_preamble(const fs::path& csv) {
  std::ifstream in(csv);
  if (!in) throw IoError("cannot read " + csv.string());
  std::string line;
  std::getline(in, line);
  const auto s = line.find("root_seed=");
  const auto f = line.find("fingerprint=");
  if (line.rfind("#", 0) != 0 || s == std::string::npos || f == std::string::npos)
    throw io::ConfigError(csv.string() + ": missing root_seed/fingerprint header");
  const std::uint64_t seed = std::stoull(line.substr(s + 10));
  return {seed, io::parse_hex64(line.substr(f + 12, 16))};
}

std::string histogram_csv(const std::vector<double>& xs, int bins) {
  std::ostringstream o;
  o << "bin_lo,bin_hi,count\n";
  if (xs.empty()) return o.str();
  const double lo = *std::min_element(xs.begin(), xs.end());
  const double hi = *std::max_element(xs.begin(), xs.end());
  const double width = hi > lo ? (hi - lo) / bins : 1.0;
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(bins), 0);
  for (const double x : xs) {
    auto b = static_cast<std::size_t>((x - lo) / width);
    counts[std::min(b, counts.size() - 1)]++;
  }
  for (int b = 0; b < bins; ++b)
    o << fmt(lo + b * width) << ',' << fmt(lo + (b + 1) * width) << ',' << counts[static_cast<std::size_t>(b)] << '\n';
  return o.str();
}

}  // namespace

int cmd_summarize(const fs::path& dir, const std::optional<fs::path>& output, std::ostream& out,
                  std::ostream& err) {
  return guarded(err, [&]() -> int {
    if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
    std::map<std::uint64_t, Campaign> campaigns;
    std::vector<fs::path> aggregates;
    for (const auto& e : fs::recursive_directory_iterator(dir))
      if (e.is_regular_file() && e.path().filename() == "aggregate.csv") aggregates.push_back(e.path());
    std::sort(aggregates.begin(), aggregates.end());
    for (const auto& agg : aggregates) {
      const auto [seed, fp] = read_preamble(agg);
      auto& c = campaigns[fp];
      c.root_seed = seed;
      {
        // policy order as run; the first one is the pairing reference
        std::ifstream in(agg);
        std::string line;
        while (std::getline(in, line)) {
          if (line.empty() || line[0] == '#' || line.rfind("policy,", 0) == 0) continue;
          const auto label = line.substr(0, line.find(','));
          if (std::find(c.policies.begin(), c.policies.end(), label) == c.policies.end())
            c.policies.push_back(label);
        }
      }
      const fs::path recs = agg.parent_path() / "records";
      if (!fs::is_directory(recs)) continue;
      std::vector<fs::path> files;
      for (const auto& e : fs::recursive_directory_iterator(recs))
        if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
      std::sort(files.begin(), files.end());
      for (const auto& f : files) {
        auto rec = io::record_from_json(json::parse(read_file(f)));
        const auto label = rec.config.policy.label();
        if (std::find(c.policies.begin(), c.policies.end(), label) == c.policies.end())
          c.policies.push_back(label);
        c.records[label].emplace(rec.config.index, std::move(rec));
      }
    }
    std::erase_if(campaigns, [](const auto& kv) { return kv.second.records.empty(); });
    if (campaigns.empty()) throw IoError(dir.string() + ": no campaign results found");

    const fs::path dest = output ? *output : dir / "summary";
    make_dirs(dest / "series");
    std::ostringstream table;
    table << "campaign,root_seed,policy,experiments,failures,failure_fraction,failure_ci_lo,"
             "failure_ci_hi,mean_residence,median_residence,energy_total,energy_mean,"
             "port_busy_total,high_latency_fraction,single_cause_fraction,failure_diff,"
             "failure_diff_ci_lo,failure_diff_ci_hi,energy_diff,energy_diff_ci_lo,"
             "energy_diff_ci_hi\n";
    for (const auto& [fp, c] : campaigns) {
      std::vector<std::vector<campaign::ExperimentRecord>> groups;
      for (const auto& label : c.policies) {
        if (!c.records.count(label)) continue;
        std::vector<campaign::ExperimentRecord> g;
        for (const auto& [i, r] : c.records.at(label)) g.push_back(r);
        groups.push_back(std::move(g));
      }
      const auto rows = campaign::compare_policies(groups);
      for (std::size_t p = 0; p < rows.size(); ++p) {
        const auto& s = rows[p];
        table << io::hex64(fp) << ',' << c.root_seed << ',' << s.policy << ','
              << s.failure.trials << ',' << s.failure.successes << ',' << fmt(s.failure.value)
              << ',' << fmt(s.failure.ci.lo) << ',' << fmt(s.failure.ci.hi) << ','
              << fmt(s.mean_residence) << ',' << fmt(s.median_residence) << ','
              << fmt(s.energy_total) << ',' << fmt(s.energy_mean) << ',' << s.port_busy_total
              << ',' << fmt(s.high_latency_fraction) << ',' << fmt(s.single_cause_fraction)
              << ',' << fmt(s.failure_diff) << ',' << fmt(s.failure_diff_ci.lo) << ','
              << fmt(s.failure_diff_ci.hi) << ',' << fmt(s.energy_diff) << ','
              << fmt(s.energy_diff_ci.lo) << ',' << fmt(s.energy_diff_ci.hi) << '\n';
        out << io::hex64(fp) << ' ' << s.policy << ": failure " << fmt(s.failure.value)
            << " energy " << fmt(s.energy_total) << '\n';

        // per-policy series
        const auto& g = groups[p];
        const std::string stem = io::hex64(fp) + "_" + policy_slug(s.policy);
        std::vector<double> energy;
        std::vector<double> residences, latencies;
        for (const auto& r : g) {
          if (energy.size() < r.energy_by_second.size()) energy.resize(r.energy_by_second.size(), 0.0);
          for (std::size_t k = 0; k < r.energy_by_second.size(); ++k) energy[k] += r.energy_by_second[k];
          for (const auto x : r.residences) residences.push_back(static_cast<double>(x));
          for (const auto& l : r.latencies) latencies.push_back(static_cast<double>(l.latency));
        }
        std::ostringstream es;
        es << preamble(c.root_seed, fp) << "second,mean_energy\n";
        for (std::size_t k = 0; k < energy.size(); ++k)
          es << k << ',' << fmt(g.empty() ? 0.0 : energy[k] / static_cast<double>(g.size())) << '\n';
        write_file(dest / "series" / (stem + "_energy.csv"), es.str());
        write_file(dest / "series" / (stem + "_residence_hist.csv"),
                   preamble(c.root_seed, fp) + histogram_csv(residences, 20));
        write_file(dest / "series" / (stem + "_latency_hist.csv"),
                   preamble(c.root_seed, fp) + histogram_csv(latencies, 20));
      }
    }
    write_file(dest / "comparison.csv", table.str());
    out << "wrote " << (dest / "comparison.csv").string() << '\n';
    return kOk;
  });
}

int cmd_gen_config(const std::optional<fs::path>& output, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto cfg = parse_campaign("");
    const std::string text = "# seuscrub campaign configuration\n" + emit_campaign_yaml(cfg, true);
    if (output)
      write_file(*output, text);
    else
      out << text;
    return kOk;
  });
}

// -- command line --------------------------------------------------------------------

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Configuration-memory upset and scrubbing campaigns"};
  app.require_subcommand(1);

  RunOverrides ov;
  std::string config_path;
  std::uint64_t seed = 0;
  unsigned workers = 0;
  std::uint64_t experiments = 0;
  std::string outdir, profile;
  auto* run = app.add_subcommand("run", "run a campaign");
  run->add_option("config", config_path, "campaign file (YAML); defaults when omitted");
  auto* o_seed = run->add_option("--seed", seed, "root seed");
  auto* o_workers = run->add_option("--workers", workers, "worker threads");
  auto* o_out = run->add_option("--out", outdir, "output directory");
  run->add_option("--policy", ov.policies, "scrub policy (repeatable)");
  auto* o_profile = run->add_option("--profile", profile, "environment profile")
                        ->check(CLI::IsMember({"benign", "harsh", "episodic"}));
  auto* o_n = run->add_option("-n,--experiments", experiments, "experiments per policy");

  std::string record_path, replay_policy, replay_out;
  auto* replay = app.add_subcommand("replay", "recompute a stored experiment record");
  replay->add_option("record", record_path, "record JSON")->required();
  auto* o_rpolicy = replay->add_option("--policy", replay_policy, "derive with another policy");
  auto* o_rout = replay->add_option("--out", replay_out, "write the recomputed record here");

  std::string sum_dir, sum_out;
  auto* summarize = app.add_subcommand("summarize", "compare policies across stored results");
  summarize->add_option("dir", sum_dir, "result directory")->required();
  auto* o_sout = summarize->add_option("--out", sum_out, "summary directory");

  std::string gen_out;
  auto* gen = app.add_subcommand("gen-config", "print a commented default configuration");
  auto* o_gout = gen->add_option("--out", gen_out, "write to a file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, er;
    const int code = app.exit(e, o, er);
    out << o.str();
    err << er.str();
    return code == 0 ? kOk : kInvalidConfig;
  }

  if (run->parsed()) {
    if (*o_seed) ov.seed = seed;
    if (*o_workers) ov.workers = workers;
    if (*o_out) ov.out = outdir;
    if (*o_profile) ov.profile = profile;
    if (*o_n) ov.experiments = experiments;
    std::optional<fs::path> cfg;
    if (!config_path.empty()) cfg = config_path;
    return cmd_run(cfg, ov, out, err);
  }
  if (replay->parsed()) {
    std::optional<std::string> p;
    if (*o_rpolicy) p = replay_policy;
    std::optional<fs::path> o;
    if (*o_rout) o = replay_out;
    return cmd_replay(record_path, p, o, out, err);
  }
  if (summarize->parsed()) {
    std::optional<fs::path> o;
    if (*o_sout) o = sum_out;
    return cmd_summarize(sum_dir, o, out, err);
  }
  std::optional<fs::path> o;
  if (*o_gout) o = gen_out;
  return cmd_gen_config(o, out, err);
}

}  // namespace seuscrub::cli
