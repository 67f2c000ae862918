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

#include "seuscrub/fault_injection.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include "seuscrub/rng.hpp"

namespace seuscrub::fault {

std::string to_string(FaultKind kind) {
  switch (kind) {
    case FaultKind::Sbe:
      return "SBE";
    case FaultKind::DoubleAdjacent:
      return "DoubleAdjacent";
    case FaultKind::Mbe:
      return "MBE";
  }
  return "?";
}

FaultKind fault_kind_from_string(const std::string& s) {
  if (s == "SBE") return FaultKind::Sbe;
  if (s == "DoubleAdjacent") return FaultKind::DoubleAdjacent;
  if (s == "MBE") return FaultKind::Mbe;
  throw std::invalid_argument("unknown fault kind '" + s + "'");
}

void RegionOfInterest::validate(const memory::Geometry& g) const {
  if (frame_lo >= frame_hi || bit_lo >= bit_hi)
    throw std::invalid_argument("region of interest is empty");
  if (frame_hi > g.frame_count() || bit_hi > g.frame_size())
    throw std::invalid_argument("region of interest exceeds device bounds");
}

std::vector<BitAddress> resolve_mbe_cells(const BitAddress& center,
                                          std::uint32_t radius,
                                          const RegionOfInterest& bounds) {
  std::vector<BitAddress> cells;
  const std::int64_t r = radius;
  const std::int64_t cf = center.frame;
  const std::int64_t cb = center.bit;
  for (std::int64_t f = std::max<std::int64_t>(cf - r, bounds.frame_lo);
       f <= std::min<std::int64_t>(cf + r, std::int64_t{bounds.frame_hi} - 1);
       ++f) {
    const std::int64_t df = f - cf;
    for (std::int64_t b = std::max<std::int64_t>(cb - r, bounds.bit_lo);
         b <= std::min<std::int64_t>(cb + r, std::int64_t{bounds.bit_hi} - 1);
         ++b) {
      const std::int64_t db = b - cb;
      if (df * df + db * db <= r * r)
        cells.push_back({static_cast<std::uint32_t>(f),
                         static_cast<std::uint32_t>(b)});
    }
  }
  return cells;
}

std::vector<BitAddress> resolve_double_adjacent(const BitAddress& center,
                                                const RegionOfInterest& bounds) {
  if (bounds.bit_hi - bounds.bit_lo < 2)
    throw std::invalid_argument(
        "double-adjacent upsets need a region at least two bits tall");
  if (center.bit + 1 < bounds.bit_hi)
    return {center, {center.frame, center.bit + 1}};
  return {{center.frame, center.bit - 1}, center};
}

FaultEvent make_event(std::uint32_t id, Tick trigger_time, FaultKind kind,
                      const BitAddress& center, std::uint32_t radius,
                      const RegionOfInterest& roi) {
  if (!roi.contains(center))
    throw std::invalid_argument("fault center (" + std::to_string(center.frame) +
                                "," + std::to_string(center.bit) +
                                ") outside region of interest");
  if (trigger_time < 0) throw std::invalid_argument("negative trigger time");
  FaultEvent ev{id, trigger_time, kind, center, 0, {}};
  switch (kind) {
    case FaultKind::Sbe:
      ev.cells = {center};
      break;
    case FaultKind::DoubleAdjacent:
      ev.cells = resolve_double_adjacent(center, roi);
      break;
    case FaultKind::Mbe:
      if (radius < 1) throw std::invalid_argument("MBE radius must be >= 1");
      ev.radius = radius;
      ev.cells = resolve_mbe_cells(center, radius, roi);
      break;
  }
  return ev;
}

namespace {

void check_weights(const KindWeights& w) {
  if (w.total() == 0) throw std::invalid_argument("fault kind weights are all zero");
}

FaultKind draw_kind(Rng& rng, const KindWeights& w) {
  const std::uint64_t r = rng.uniform_below(w.total());
  if (r < w.sbe) return FaultKind::Sbe;
  if (r < std::uint64_t{w.sbe} + w.double_adjacent) return FaultKind::DoubleAdjacent;
  return FaultKind::Mbe;
}

FaultEvent draw_event(Rng& rng, Tick t, const RegionOfInterest& roi,
                      const KindWeights& weights, std::uint32_t mbe_radius_max) {
  const FaultKind kind = draw_kind(rng, weights);
  const BitAddress center{
      roi.frame_lo + static_cast<std::uint32_t>(
                         rng.uniform_below(roi.frame_hi - roi.frame_lo)),
      roi.bit_lo +
          static_cast<std::uint32_t>(rng.uniform_below(roi.bit_hi - roi.bit_lo))};
  std::uint32_t radius = 0;
  if (kind == FaultKind::Mbe)
    radius = static_cast<std::uint32_t>(rng.uniform_int(1, mbe_radius_max));
  return make_event(0, t, kind, center, radius, roi);
}

void finalize(FaultPlan& plan) {
  std::stable_sort(plan.events.begin(), plan.events.end(),
                   [](const FaultEvent& a, const FaultEvent& b) {
                     return a.trigger_time < b.trigger_time;
                   });
  for (std::size_t i = 0; i < plan.events.size(); ++i)
    plan.events[i].id = static_cast<std::uint32_t>(i);
}

}  // namespace

FaultPlan generate_plan(std::uint64_t seed, std::uint32_t count,
                        const RegionOfInterest& roi, Tick duration,
                        const KindWeights& weights,
                        std::uint32_t mbe_radius_max) {
  if (roi.frame_lo >= roi.frame_hi || roi.bit_lo >= roi.bit_hi)
    throw std::invalid_argument("region of interest is empty");
  check_weights(weights);
  if (duration < 1) throw std::invalid_argument("duration must be >= 1 tick");
  if (weights.mbe > 0 && mbe_radius_max < 1)
    throw std::invalid_argument("mbe_radius_max must be >= 1");

  FaultPlan plan{seed, weights, {}};
  plan.events.reserve(count);
  Rng rng(seed);
  for (std::uint32_t i = 0; i < count; ++i) {
    const Tick t = static_cast<Tick>(rng.uniform_below(static_cast<std::uint64_t>(duration)));
    plan.events.push_back(draw_event(rng, t, roi, weights, mbe_radius_max));
  }
  finalize(plan);
  return plan;
}

double FluxSeries::at(Tick t) const {
  if (values.empty()) return 0.0;
  const auto idx = static_cast<std::size_t>(t / cadence);
  return values[std::min(idx, values.size() - 1)];
}

FaultPlan poisson_arrival_plan(std::uint64_t seed, double base_rate,
                               const FluxSeries& flux, double flux_ref,
                               const RegionOfInterest& roi, Tick duration,
                               const KindWeights& weights,
                               std::uint32_t mbe_radius_max) {
  if (base_rate < 0) throw std::invalid_argument("base_rate must be >= 0");
  if (flux_ref <= 0) throw std::invalid_argument("flux_ref must be > 0");
  if (roi.frame_lo >= roi.frame_hi || roi.bit_lo >= roi.bit_hi)
    throw std::invalid_argument("region of interest is empty");
  check_weights(weights);
  if (flux.cadence < 1) throw std::invalid_argument("flux cadence must be >= 1");
  if (static_cast<Tick>(flux.values.size()) * flux.cadence < duration)
    throw std::invalid_argument("flux series does not cover the duration");

  double peak = 0.0;
  for (const double v : flux.values) {
    if (v < 0) throw std::invalid_argument("negative flux sample");
    peak = std::max(peak, v);
  }

  FaultPlan plan{seed, weights, {}};
  if (base_rate == 0.0 || peak == 0.0) return plan;

  Rng rng(seed);
  const double peak_rate = base_rate * peak / flux_ref;
  double t = 0.0;
  while (true) {
    t += rng.exponential(peak_rate);
    if (t >= static_cast<double>(duration)) break;
    const auto tick = static_cast<Tick>(t);
    const double accept = flux.at(tick) / peak;
    if (rng.uniform01() >= accept) continue;
    plan.events.push_back(draw_event(rng, tick, roi, weights, mbe_radius_max));
  }
  finalize(plan);
  return plan;
}

std::vector<const FaultEvent*> FaultInjector::inject_due(memory::ConfigMemory& mem,
                                                         Tick now) {
  std::vector<const FaultEvent*> out;
  while (next_ < plan_->events.size() && plan_->events[next_].trigger_time <= now) {
    const FaultEvent& ev = plan_->events[next_++];
    mem.flip_bits(ev.cells);
    applied_.push_back({ev.id, now});
    out.push_back(&ev);
  }
  return out;
}

Tick FaultInjector::next_trigger() const {
  if (exhausted()) return std::numeric_limits<Tick>::max();
  return plan_->events[next_].trigger_time;
}

nlohmann::json plan_to_json(const FaultPlan& plan) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& ev : plan.events) {
    arr.push_back({{"id", ev.id},
                   {"trigger_time", ev.trigger_time},
                   {"kind", to_string(ev.kind)},
                   {"center", {{"frame", ev.center.frame}, {"bit", ev.center.bit}}},
                   {"radius", ev.radius}});
  }
  return arr;
}

std::vector<FaultEvent> events_from_json(const nlohmann::json& j,
                                         const RegionOfInterest& roi) {
  if (!j.is_array()) throw std::invalid_argument("fault plan must be a JSON array");
  std::vector<FaultEvent> events;
  for (const auto& e : j) {
    events.push_back(make_event(
        e.at("id").get<std::uint32_t>(), e.at("trigger_time").get<Tick>(),
        fault_kind_from_string(e.at("kind").get<std::string>()),
        {e.at("center").at("frame").get<std::uint32_t>(),
         e.at("center").at("bit").get<std::uint32_t>()},
        e.value("radius", 0U), roi));
  }
  std::stable_sort(events.begin(), events.end(),
                   [](const FaultEvent& a, const FaultEvent& b) {
                     return a.trigger_time < b.trigger_time;
                   });
  return events;
}

}  // namespace seuscrub::fault
