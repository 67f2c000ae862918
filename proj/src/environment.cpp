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

#include "seuscrub/environment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "seuscrub/rng.hpp"

namespace seuscrub::env {

void validate_sample(const SensorSample& s) {
  if (!(s.temperature >= kTemperatureMin && s.temperature <= kTemperatureMax))
    throw std::invalid_argument("sensor sample at t=" + std::to_string(s.t) +
                                ": temperature out of bounds");
  for (std::size_t i = 0; i < kConverterCount; ++i) {
    const double nom = kNominalVoltages[i];
    if (!(std::abs(s.converter_voltages[i] - nom) <= kVoltageTolerance * nom + 1e-12))
      throw std::invalid_argument("sensor sample at t=" + std::to_string(s.t) +
                                  ": converter " + std::to_string(i) +
                                  " voltage outside +-20% of nominal");
  }
  if (!(s.flux >= 0.0))
    throw std::invalid_argument("sensor sample at t=" + std::to_string(s.t) +
                                ": negative flux");
}

std::string to_string(ProfileKind kind) {
  switch (kind) {
    case ProfileKind::Benign:
      return "benign";
    case ProfileKind::Harsh:
      return "harsh";
    case ProfileKind::Episodic:
      return "episodic";
  }
  return "?";
}

ProfileKind profile_from_string(const std::string& s) {
  if (s == "benign") return ProfileKind::Benign;
  if (s == "harsh") return ProfileKind::Harsh;
  if (s == "episodic") return ProfileKind::Episodic;
  throw std::invalid_argument("unknown environment profile '" + s + "'");
}

void Profile::validate(Tick duration) const {
  if (kind != ProfileKind::Episodic) {
    if (!bursts.empty())
      throw std::invalid_argument("environment: bursts are only valid for the episodic profile");
    return;
  }
  for (const auto& b : bursts) {
    if (b.start < 0 || b.end <= b.start || b.end > duration)
      throw std::invalid_argument("environment: burst interval must satisfy 0 <= start < end <= duration");
    if (!(b.multiplier >= 0.0))
      throw std::invalid_argument("environment: burst multiplier must be >= 0");
  }
}

fault::FluxSeries EnvironmentTrace::flux_series() const {
  fault::FluxSeries s{cadence, {}};
  s.values.reserve(samples.size());
  for (const auto& x : samples) s.values.push_back(x.flux);
  return s;
}

EnvironmentTrace generate_trace(std::uint64_t seed, Tick duration, Tick cadence,
                                const Profile& profile,
                                const EnvironmentParams& params) {
  if (cadence < 1 || duration < cadence)
    throw std::invalid_argument("environment: need duration >= cadence >= 1");
  if (duration % cadence != 0)
    throw std::invalid_argument("environment: cadence must divide duration");
  profile.validate(duration);

  EnvironmentTrace trace;
  trace.seed = seed;
  trace.cadence = cadence;
  trace.duration = duration;
  trace.bursts = profile.bursts;

  Rng rng(seed);
  const Tick n = duration / cadence;
  trace.samples.reserve(static_cast<std::size_t>(n));
  double temperature = params.temp_base;
  bool first = true;
  for (Tick k = 0; k < n; ++k) {
    SensorSample s;
    s.t = k * cadence;

    double base = 1.0;
    if (profile.kind == ProfileKind::Harsh) base = params.harsh_flux;
    if (profile.kind == ProfileKind::Episodic)
      for (const auto& b : profile.bursts)
        if (s.t >= b.start && s.t < b.end) base *= b.multiplier;
    s.flux = std::max(0.0, base * (1.0 + params.flux_noise * rng.uniform(-1.0, 1.0)));

    const double target =
        params.temp_base + params.temp_coupling * std::max(0.0, s.flux - 1.0);
    if (first) {
      temperature = target;
      first = false;
    } else {
      temperature += params.temp_lag * (target - temperature) +
                     params.temp_noise * rng.normal();
    }
    temperature = std::clamp(temperature, kTemperatureMin, kTemperatureMax);
    s.temperature = temperature;

    const bool dip = rng.uniform01() < params.dip_rate * s.flux;
    const auto dip_rail = static_cast<std::size_t>(rng.uniform_below(kConverterCount));
    const double dip_depth = rng.uniform(params.dip_depth_min, params.dip_depth_max);
    for (std::size_t i = 0; i < kConverterCount; ++i) {
      double rel = params.voltage_jitter * rng.uniform(-1.0, 1.0);
      if (dip && i == dip_rail) rel -= dip_depth;
      rel = std::clamp(rel, -kVoltageTolerance, kVoltageTolerance);
      s.converter_voltages[i] = kNominalVoltages[i] * (1.0 + rel);
    }
    s.humidity = 40.0 + 2.0 * rng.uniform(-1.0, 1.0);
    s.pressure = 1013.0 + 1.0 * rng.uniform(-1.0, 1.0);
    trace.samples.push_back(s);
  }
  return trace;
}

const SensorSample& read_sensors(const EnvironmentTrace& trace, Tick now) {
  if (now < 0 || now >= trace.duration || trace.samples.empty())
    throw std::out_of_range("sensor read at t=" + std::to_string(now) +
                            " outside trace span");
  const auto idx = static_cast<std::size_t>(now / trace.cadence);
  return trace.samples[std::min(idx, trace.samples.size() - 1)];
}

namespace {

std::string fmt_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& cell, const std::string& what, std::size_t line) {
  double v = 0;
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size())
    throw std::invalid_argument("trace line " + std::to_string(line) + ": bad " + what +
                                " '" + cell + "'");
  return v;
}

constexpr const char* kHeader = "t,temperature,v0,v1,v2,flux,humidity,pressure";

}  // namespace

void write_trace_csv(const std::filesystem::path& path, const EnvironmentTrace& trace) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write environment trace " + path.string());
  out << kHeader << '\n';
  for (const auto& s : trace.samples) {
    out << s.t << ',' << fmt_double(s.temperature);
    for (const double v : s.converter_voltages) out << ',' << fmt_double(v);
    out << ',' << fmt_double(s.flux) << ',';
    if (s.humidity) out << fmt_double(*s.humidity);
    out << ',';
    if (s.pressure) out << fmt_double(*s.pressure);
    out << '\n';
  }
}

EnvironmentTrace read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open environment trace " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kHeader)
    throw std::invalid_argument("environment trace: expected header '" +
                                std::string(kHeader) + "'");
  EnvironmentTrace trace;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (cells.size() != 8)
      throw std::invalid_argument("trace line " + std::to_string(lineno) +
                                  ": expected 8 columns");
    SensorSample s;
    s.t = static_cast<Tick>(parse_double(cells[0], "t", lineno));
    s.temperature = parse_double(cells[1], "temperature", lineno);
    for (std::size_t i = 0; i < kConverterCount; ++i)
      s.converter_voltages[i] = parse_double(cells[2 + i], "voltage", lineno);
    s.flux = parse_double(cells[5], "flux", lineno);
    if (!cells[6].empty()) s.humidity = parse_double(cells[6], "humidity", lineno);
    if (!cells[7].empty()) s.pressure = parse_double(cells[7], "pressure", lineno);
    validate_sample(s);
    trace.samples.push_back(s);
  }
  if (trace.samples.empty()) throw std::invalid_argument("environment trace is empty");
  if (trace.samples.front().t != 0)
    throw std::invalid_argument("environment trace must start at t=0");
  trace.cadence = trace.samples.size() > 1 ? trace.samples[1].t - trace.samples[0].t : 1;
  if (trace.cadence < 1) throw std::invalid_argument("environment trace: bad cadence");
  for (std::size_t i = 0; i < trace.samples.size(); ++i)
    if (trace.samples[i].t != static_cast<Tick>(i) * trace.cadence)
      throw std::invalid_argument("environment trace: irregular cadence at row " +
                                  std::to_string(i + 1));
  trace.duration = static_cast<Tick>(trace.samples.size()) * trace.cadence;
  return trace;
}

}  // namespace seuscrub::env
