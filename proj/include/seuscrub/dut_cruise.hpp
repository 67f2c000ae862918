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
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "seuscrub/config_memory.hpp"
#include "seuscrub/fault_injection.hpp"
#include "seuscrub/fixed_point.hpp"
#include "seuscrub/time.hpp"

namespace seuscrub::dut {

using memory::BitAddress;

struct PidParams {
  Q16 kp = Q16::from_double(4.0);
  Q16 ki = Q16::from_double(0.004);  // per loop period
  Q16 kd = Q16::from_double(0.0);
  Q16 u_min = Q16::from_double(-100.0);
  Q16 u_max = Q16::from_double(100.0);
  Tick loop_period = 1;

  void validate() const;
  bool operator==(const PidParams&) const = default;
};

struct PidState {
  Q16 integrator;  // running sum of the error
  Q16 prev_error;
};

/// Q2.30 coefficient; enough resolution that a + b == 1 can hold exactly.
struct Coeff30 {
  static constexpr int kFracBits = 30;
  std::int64_t raw = 0;

  bool operator==(const Coeff30&) const = default;
  static Coeff30 from_double(double v) {
    return {std::llround(v * static_cast<double>(std::int64_t{1} << kFracBits))};
  }
  double to_double() const {
    return static_cast<double>(raw) / static_cast<double>(std::int64_t{1} << kFracBits);
  }
};

/// First-order vehicle model v[k+1] = a*v[k] + b*u[k].
/// Speed is held internally as Q32.32 and exposed as Q16.16.
struct PlantModel {
  Coeff30 a = Coeff30::from_double(0.999);
  Coeff30 b = Coeff30::from_double(0.001);
  std::int64_t speed_q32 = 0;

  void validate() const;
  Q16 speed() const;
  void set_speed(Q16 v) { speed_q32 = std::int64_t{v.raw()} << 16; }
  bool operator==(const PlantModel&) const = default;
};

Q16 plant_step(PlantModel& plant, Q16 u);

/// The 32-bit DUT port: setpoint in, actuation out, plus control lines.
struct DutInterface {
  Q16 input;
  Q16 output;
  bool enable = true;
  bool reset = false;
};

// ---------------------------------------------------------------------------
// Corruption vocabulary

enum class ElementKind : std::uint8_t {
  KpBit,
  KiBit,
  KdBit,
  AccStuck,
  ErrPathStuckLow,
  OutForce,
  RoutingSwap,
};

inline constexpr int kElementKindCount = 7;

struct Element {
  ElementKind kind = ElementKind::KpBit;
  std::uint8_t bit = 0;  // KpBit/KiBit/KdBit/OutForce only

  auto operator<=>(const Element&) const = default;
};

std::string to_string(const Element& e);
Element element_from_string(const std::string& s);

/// Behavioral state of the DUT given the currently active corruptions.
struct EffectiveDut {
  std::uint32_t kp_flip = 0;
  std::uint32_t ki_flip = 0;
  std::uint32_t kd_flip = 0;
  std::uint32_t out_force = 0;
  bool acc_stuck = false;
  bool err_stuck_low = false;
  bool routing_swap = false;

  bool nominal() const {
    return kp_flip == 0 && ki_flip == 0 && kd_flip == 0 && out_force == 0 &&
           !acc_stuck && !err_stuck_low && !routing_swap;
  }
  void activate(const Element& e);
  bool operator==(const EffectiveDut&) const = default;
};

/// PID step with anti-windup by integrator hold while the output clamps.
Q16 pid_step(const PidParams& params, PidState& state, Q16 setpoint,
             Q16 measured);

/// pid_step under the given corruptions.
Q16 dut_step(const PidParams& params, const EffectiveDut& eff, PidState& state,
             Q16 setpoint, Q16 measured);

// ---------------------------------------------------------------------------
// Sensitivity map

enum class BitClass : std::uint8_t { Unused, NonSensitive, Sensitive };

struct Binding {
  Element element;
  std::uint32_t group = 0;  // element is active only when every member flipped
};

struct ElementWeights {
  double kp_bit = 0.2;
  double ki_bit = 0.2;
  double kd_bit = 0.1;
  double acc_stuck = 0.1;
  double err_path_stuck_low = 0.1;
  double out_force = 0.2;
  double routing_swap = 0.1;

  bool operator==(const ElementWeights&) const = default;
};

struct MapParams {
  std::uint64_t seed = 3;
  double unused = 0.4;
  double non_sensitive = 0.5;
  double sensitive = 0.1;
  ElementWeights weights;
  /// Fraction of ERR_PATH_STUCK_LOW bindings realized as a redundant pair of
  /// configuration bits (a route that only breaks when both are upset).
  double pair_fraction = 0.5;

  void validate() const;
  bool operator==(const MapParams&) const = default;
};

struct MapStats {
  std::uint64_t layout_bits = 0;
  std::uint64_t unused = 0;
  std::uint64_t non_sensitive = 0;
  std::uint64_t sensitive = 0;
  std::uint64_t paired_groups = 0;

  double sensitive_fraction() const {
    return layout_bits == 0 ? 0.0 : static_cast<double>(sensitive) / layout_bits;
  }
};

class SensitivityMap {
 public:
  SensitivityMap(const memory::Geometry& geometry,
                 const fault::RegionOfInterest& layout);

  const memory::Geometry& geometry() const { return geometry_; }
  const fault::RegionOfInterest& layout() const { return layout_; }

  BitClass classify(const BitAddress& a) const {
    return static_cast<BitClass>(classes_[index(a)]);
  }
  const Binding* binding(const BitAddress& a) const;

  void set_unused(const BitAddress& a);
  void set_non_sensitive(const BitAddress& a);
  /// Binds every member to element as one group. Returns the group id.
  std::uint32_t bind(std::span<const BitAddress> members, const Element& element);

  std::span<const BitAddress> group_members(std::uint32_t group) const {
    return groups_[group];
  }
  /// First bit (in address order) bound to element as a single-bit group.
  std::optional<BitAddress> find_single(const Element& element) const;
  std::vector<std::uint32_t> paired_groups() const;

  MapStats stats() const;

 private:
  std::size_t index(const BitAddress& a) const {
    return std::size_t{a.frame} * geometry_.frame_size() + a.bit;
  }
  void unbind(const BitAddress& a);

  memory::Geometry geometry_;
  fault::RegionOfInterest layout_;
  std::vector<std::uint8_t> classes_;
  std::unordered_map<std::uint64_t, Binding> bindings_;
  std::vector<std::vector<BitAddress>> groups_;
};

SensitivityMap build_default_map(const MapParams& params,
                                 const memory::Geometry& geometry,
                                 const fault::RegionOfInterest& layout);

/// Active corruptions for the current live-vs-golden diff.
EffectiveDut apply_corruptions(const SensitivityMap& map,
                               const std::set<BitAddress>& diff);

/// True when any cell in cells is bound to a sensitive element.
bool touches_sensitive(const SensitivityMap& map,
                       std::span<const BitAddress> cells);

// ---------------------------------------------------------------------------
// Workload and traces

struct SquareWave {
  Q16 low = Q16::from_double(15.0);
  Q16 high = Q16::from_double(25.0);
  Tick half_period = 7000;

  void validate() const;
  Q16 at(Tick t) const { return ((t / half_period) % 2 == 0) ? low : high; }
  bool operator==(const SquareWave&) const = default;
};

struct TraceSample {
  Q16 setpoint;
  Q16 measured;
  Q16 actuation;

  bool operator==(const TraceSample&) const = default;
};

using Trace = std::vector<TraceSample>;

/// DUT plus plant, stepped once per tick.
class CruiseLoop {
 public:
  CruiseLoop(const PidParams& params, const PlantModel& plant)
      : params_(params), plant_(plant) {}

  /// One control period: read speed, compute actuation, advance the plant.
  TraceSample step(Q16 setpoint);

  void set_corruption(const EffectiveDut& eff) { eff_ = eff; }
  void set_enable(bool v) { io_.enable = v; }
  void request_reset() { io_.reset = true; }

  const DutInterface& io() const { return io_; }
  const PidState& state() const { return state_; }
  const PlantModel& plant() const { return plant_; }

 private:
  PidParams params_;
  PlantModel plant_;
  PidState state_;
  EffectiveDut eff_;
  DutInterface io_;
};

/// Fault-free run of the workload.
Trace simulate_nominal(const PidParams& params, const PlantModel& plant,
                       const SquareWave& workload, Tick duration);

/// CSV: tick,setpoint,measured_speed,actuation,diverged_flag. preamble is
/// written verbatim before the header.
void write_trace_csv(const std::filesystem::path& path, const Trace& trace,
                     const Trace* goldrun, const std::string& preamble = "");

std::string format_q16(Q16 v);

}  // namespace seuscrub::dut
