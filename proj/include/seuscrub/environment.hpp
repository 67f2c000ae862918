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

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "seuscrub/fault_injection.hpp"
#include "seuscrub/time.hpp"

namespace seuscrub::env {

inline constexpr std::size_t kConverterCount = 3;
/// VCCINT, VCCAUX, VCCO rails.
inline constexpr std::array<double, kConverterCount> kNominalVoltages{1.0, 2.5, 3.3};

inline constexpr double kTemperatureMin = -55.0;
inline constexpr double kTemperatureMax = 125.0;
inline constexpr double kVoltageTolerance = 0.20;

struct SensorSample {
  Tick t = 0;
  double temperature = 0.0;
  std::array<double, kConverterCount> converter_voltages = kNominalVoltages;
  double flux = 1.0;  // normalized; 1.0 is the reference flux
  std::optional<double> humidity;
  std::optional<double> pressure;

  bool operator==(const SensorSample&) const = default;
};

/// Throws std::invalid_argument when a sample is outside physical bounds.
void validate_sample(const SensorSample& s);

struct Burst {
  Tick start = 0;
  Tick end = 0;
  double multiplier = 1.0;

  bool operator==(const Burst&) const = default;
};

enum class ProfileKind { Benign, Harsh, Episodic };

std::string to_string(ProfileKind kind);
ProfileKind profile_from_string(const std::string& s);

struct Profile {
  ProfileKind kind = ProfileKind::Benign;
  std::vector<Burst> bursts;  // Episodic only

  void validate(Tick duration) const;
  bool operator==(const Profile&) const = default;
};

/// Generation knobs. None of these are physical; they give the predictor
/// something correlated to observe.
struct EnvironmentParams {
  double temp_base = 40.0;
  double temp_coupling = 2.0;  // degC per unit flux above 1.0, steady state
  double temp_lag = 0.05;      // first-order approach per sample
  double temp_noise = 0.2;     // random-walk step stddev
  double flux_noise = 0.1;     // relative, uniform
  double harsh_flux = 10.0;
  double voltage_jitter = 0.005;  // relative, uniform
  double dip_rate = 0.002;        // per sample per unit flux
  double dip_depth_min = 0.03;
  double dip_depth_max = 0.08;

  bool operator==(const EnvironmentParams&) const = default;
};

struct EnvironmentTrace {
  std::uint64_t seed = 0;
  Tick cadence = 1;
  Tick duration = 0;
  std::vector<SensorSample> samples;
  std::vector<Burst> bursts;

  fault::FluxSeries flux_series() const;
};

EnvironmentTrace generate_trace(std::uint64_t seed, Tick duration, Tick cadence,
                                const Profile& profile,
                                const EnvironmentParams& params = {});

/// Latest sample at or before now (zero-order hold).
const SensorSample& read_sensors(const EnvironmentTrace& trace, Tick now);

/// CSV with header t,temperature,v0,v1,v2,flux,humidity,pressure.
void write_trace_csv(const std::filesystem::path& path, const EnvironmentTrace& trace);
EnvironmentTrace read_trace_csv(const std::filesystem::path& path);

}  // namespace seuscrub::env
