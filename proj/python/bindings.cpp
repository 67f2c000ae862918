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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <string>
#include <vector>

#include "seuscrub/campaign.hpp"
#include "seuscrub/cli.hpp"
#include "seuscrub/serialization.hpp"

namespace py = pybind11;
using namespace seuscrub;

namespace {

// Configs and records cross the boundary as JSON text; the python side wraps
// them in dicts.

memory::BitVector to_bits(const std::vector<int>& v) {
  memory::BitVector b(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) b.set(i, v[i] != 0);
  return b;
}

std::vector<int> from_bits(const memory::BitVector& b) {
  std::vector<int> v(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) v[i] = b.get(i);
  return v;
}

campaign::CampaignConfig campaign_of(const std::string& text) {
  return text.empty() ? campaign::CampaignConfig{} : cli::parse_campaign(text);
}

std::string run_experiment_json(const std::string& experiment) {
  const auto cfg = io::experiment_from_json(io::json::parse(experiment));
  cfg.validate();
  campaign::ExperimentRecord rec;
  {
    py::gil_scoped_release release;
    rec = campaign::run_experiment(cfg);
  }
  return io::to_json(rec).dump();
}

py::dict run_campaign_json(const std::string& text) {
  const auto cfg = campaign_of(text);
  cfg.validate();
  campaign::CampaignResult res;
  {
    py::gil_scoped_release release;
    res = campaign::run_campaign(cfg);
  }
  py::list summaries;
  for (const auto& s : campaign::compare_policies(res.records)) {
    py::dict d;
    d["policy"] = s.policy;
    d["failure"] = s.failure.value;
    d["failure_ci"] = py::make_tuple(s.failure.ci.lo, s.failure.ci.hi);
    d["mean_residence"] = s.mean_residence;
    d["energy_total"] = s.energy_total;
    d["failure_diff"] = s.failure_diff;
    d["failure_diff_ci"] = py::make_tuple(s.failure_diff_ci.lo, s.failure_diff_ci.hi);
    summaries.append(d);
  }
  py::dict out;
  out["aggregate_csv"] = cli::aggregate_csv(cfg, res);
  out["summaries"] = summaries;
  return out;
}

py::tuple cli_main(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"seuscrub"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int rc;
  {
    py::gil_scoped_release release;
    rc = cli::main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
  }
  return py::make_tuple(rc, out.str(), err.str());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "SEU injection and scrubbing simulator";

  py::register_exception<io::ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def("crc32", [](py::bytes data) {
    const std::string s = data;
    return memory::crc32({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()});
  });
  m.def("ecc_encode", [](const std::vector<int>& payload, std::uint32_t frame_size) {
    const memory::EccLayout layout(frame_size);
    if (payload.size() != layout.payload_bits())
      throw py::value_error("payload must have " + std::to_string(layout.payload_bits()) + " bits");
    return from_bits(memory::ecc_encode_frame(layout, to_bits(payload)));
  }, py::arg("payload"), py::arg("frame_size") = 1312);
  m.def("ecc_decode", [](const std::vector<int>& frame) {
    const memory::EccLayout layout(static_cast<std::uint32_t>(frame.size()));
    const auto r = memory::ecc_decode_frame(layout, to_bits(frame));
    return py::make_tuple(memory::to_string(r.status), r.position);
  });
  m.def("payload_bits", [](std::uint32_t frame_size) {
    return memory::EccLayout(frame_size).payload_bits();
  }, py::arg("frame_size") = 1312);

  m.def("default_campaign_json", [] { return io::to_json(campaign::CampaignConfig{}).dump(); });
  m.def("parse_campaign_json", [](const std::string& text) {
    return io::to_json(cli::parse_campaign(text)).dump();
  });
  m.def("campaign_yaml", [](const std::string& text, bool commented) {
    return cli::emit_campaign_yaml(campaign_of(text), commented);
  }, py::arg("text") = "", py::arg("commented") = false);
  m.def("experiment_json", [](const std::string& text, const std::string& policy, std::uint64_t index) {
    const auto cfg = campaign_of(text);
    return io::to_json(cfg.experiment_at(scrub::PolicySpec::parse(policy), index)).dump();
  });
  m.def("fingerprint", [](const std::string& experiment) {
    return io::hex64(io::fingerprint(io::experiment_from_json(io::json::parse(experiment))));
  });
  m.def("goldrun", [](const std::string& experiment) {
    const auto trace = campaign::run_goldrun(io::experiment_from_json(io::json::parse(experiment)));
    std::vector<std::tuple<double, double, double>> out;
    out.reserve(trace.size());
    for (const auto& s : trace)
      out.emplace_back(s.setpoint.to_double(), s.measured.to_double(), s.actuation.to_double());
    return out;
  });
  m.def("run_experiment_json", &run_experiment_json);
  m.def("run_campaign", &run_campaign_json);
  m.def("cli", &cli_main);
}
