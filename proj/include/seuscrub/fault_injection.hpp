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
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "seuscrub/config_memory.hpp"
#include "seuscrub/time.hpp"

namespace seuscrub::fault {

using memory::BitAddress;

enum class FaultKind { Sbe, DoubleAdjacent, Mbe };

std::string to_string(FaultKind kind);
FaultKind fault_kind_from_string(const std::string& s);

/// Half-open frame and bit window that injection is confined to.
struct RegionOfInterest {
  std::uint32_t frame_lo = 0;
  std::uint32_t frame_hi = 0;
  std::uint32_t bit_lo = 0;
  std::uint32_t bit_hi = 0;

  /// Throws std::invalid_argument if empty or outside the device.
  void validate(const memory::Geometry& geometry) const;
  bool contains(const BitAddress& a) const {
    return a.frame >= frame_lo && a.frame < frame_hi && a.bit >= bit_lo &&
           a.bit < bit_hi;
  }
  std::uint64_t cell_count() const {
    return std::uint64_t{frame_hi - frame_lo} * (bit_hi - bit_lo);
  }

  static RegionOfInterest whole(const memory::Geometry& g) {
    return {0, g.frame_count(), 0, g.frame_size()};
  }

  bool operator==(const RegionOfInterest&) const = default;
};

struct FaultEvent {
  std::uint32_t id = 0;
  Tick trigger_time = 0;
  FaultKind kind = FaultKind::Sbe;
  BitAddress center;
  std::uint32_t radius = 0;  // MBE only
  std::vector<BitAddress> cells;

  bool operator==(const FaultEvent&) const = default;
};

struct KindWeights {
  std::uint32_t sbe = 20;
  std::uint32_t double_adjacent = 0;
  std::uint32_t mbe = 1;

  std::uint64_t total() const {
    return std::uint64_t{sbe} + double_adjacent + mbe;
  }
  bool operator==(const KindWeights&) const = default;
};

struct FaultPlan {
  std::uint64_t seed = 0;
  KindWeights weights;
  std::vector<FaultEvent> events;  // sorted by trigger_time, ids unique
};

/// Cells of a circular upset: every (f, b) with
/// (f - cf)^2 + (b - cb)^2 <= radius^2, clipped to bounds.
std::vector<BitAddress> resolve_mbe_cells(const BitAddress& center,
                                          std::uint32_t radius,
                                          const RegionOfInterest& bounds);

/// Two vertically adjacent cells in the center's frame; steps downward when
/// the cell below falls outside the bounds.
std::vector<BitAddress> resolve_double_adjacent(const BitAddress& center,
                                                const RegionOfInterest& bounds);

/// Builds a fully resolved event. Throws if the center lies outside roi.
FaultEvent make_event(std::uint32_t id, Tick trigger_time, FaultKind kind,
                      const BitAddress& center, std::uint32_t radius,
                      const RegionOfInterest& roi);

/// count events, uniform trigger times over [0, duration), kinds by weight,
/// uniform centers over roi, MBE radius uniform in [1, mbe_radius_max].
FaultPlan generate_plan(std::uint64_t seed, std::uint32_t count,
                        const RegionOfInterest& roi, Tick duration,
                        const KindWeights& weights,
                        std::uint32_t mbe_radius_max);

/// Piecewise-constant flux series (zero-order hold at a fixed cadence).
struct FluxSeries {
  Tick cadence = 1;
  std::vector<double> values;

  double at(Tick t) const;
};

/// Inhomogeneous Poisson arrivals with rate base_rate * flux(t) / flux_ref,
/// generated by thinning a homogeneous process at the peak rate.
FaultPlan poisson_arrival_plan(std::uint64_t seed, double base_rate,
                               const FluxSeries& flux, double flux_ref,
                               const RegionOfInterest& roi, Tick duration,
                               const KindWeights& weights,
                               std::uint32_t mbe_radius_max);

struct AppliedFault {
  std::uint32_t id = 0;
  Tick applied_at = 0;

  bool operator==(const AppliedFault&) const = default;
};

/// Walks a plan in trigger order and applies due events to a memory.
class FaultInjector {
 public:
  explicit FaultInjector(const FaultPlan& plan) : plan_(&plan) {}

  /// Applies every pending event with trigger_time <= now. Each event's cells
  /// are flipped in one call, so multi-frame upsets are never split.
  std::vector<const FaultEvent*> inject_due(memory::ConfigMemory& mem, Tick now);

  Tick next_trigger() const;
  bool exhausted() const { return next_ >= plan_->events.size(); }
  const std::vector<AppliedFault>& applied() const { return applied_; }

 private:
  const FaultPlan* plan_;
  std::size_t next_ = 0;
  std::vector<AppliedFault> applied_;
};

// Replay format: [{id, trigger_time, kind, center:{frame,bit}, radius}, ...]
nlohmann::json plan_to_json(const FaultPlan& plan);
std::vector<FaultEvent> events_from_json(const nlohmann::json& j,
                                         const RegionOfInterest& roi);

}  // namespace seuscrub::fault
