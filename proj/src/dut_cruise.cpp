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

#include "seuscrub/dut_cruise.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>

#include "seuscrub/rng.hpp"

namespace seuscrub::dut {

void PidParams::validate() const {
  if (!(u_min < u_max)) throw std::invalid_argument("pid: u_min must be < u_max");
  if (loop_period < 1) throw std::invalid_argument("pid: loop_period must be >= 1");
}

void PlantModel::validate() const {
  if (a.raw <= 0 || a.raw >= (std::int64_t{1} << Coeff30::kFracBits))
    throw std::invalid_argument("plant: coefficient a must lie in (0, 1)");
  if (b.raw <= 0) throw std::invalid_argument("plant: coefficient b must be > 0");
}

namespace {

constexpr std::int64_t kSpeedLimit = std::int64_t{1} << 47;  // Q16 range in Q32.32

std::int64_t round_shift(__int128 v, int shift) {
  return static_cast<std::int64_t>((v + (__int128{1} << (shift - 1))) >> shift);
}

}  // namespace

Q16 PlantModel::speed() const {
  return Q16::from_raw(saturate32(round_shift(speed_q32, 16)));
}

Q16 plant_step(PlantModel& plant, Q16 u) {
  const __int128 acc = __int128{plant.a.raw} * plant.speed_q32 +
                       __int128{plant.b.raw} * (__int128{u.raw()} << 16);
  plant.speed_q32 =
      std::clamp(round_shift(acc, Coeff30::kFracBits), -kSpeedLimit, kSpeedLimit - 1);
  return plant.speed();
}

// ---------------------------------------------------------------------------

std::string to_string(const Element& e) {
  switch (e.kind) {
    case ElementKind::KpBit:
      return "KP_BIT(" + std::to_string(e.bit) + ")";
    case ElementKind::KiBit:
      return "KI_BIT(" + std::to_string(e.bit) + ")";
    case ElementKind::KdBit:
      return "KD_BIT(" + std::to_string(e.bit) + ")";
    case ElementKind::AccStuck:
      return "ACC_STUCK";
    case ElementKind::ErrPathStuckLow:
      return "ERR_PATH_STUCK_LOW";
    case ElementKind::OutForce:
      return "OUT_FORCE(" + std::to_string(e.bit) + ")";
    case ElementKind::RoutingSwap:
      return "ROUTING_SWAP";
  }
  return "?";
}

Element element_from_string(const std::string& s) {
  if (s == "ACC_STUCK") return {ElementKind::AccStuck, 0};
  if (s == "ERR_PATH_STUCK_LOW") return {ElementKind::ErrPathStuckLow, 0};
  if (s == "ROUTING_SWAP") return {ElementKind::RoutingSwap, 0};
  const auto open = s.find('(');
  if (open != std::string::npos && s.back() == ')') {
    const std::string head = s.substr(0, open);
    const int bit = std::stoi(s.substr(open + 1, s.size() - open - 2));
    if (bit < 0 || bit > 31)
      throw std::invalid_argument("element bit out of range in '" + s + "'");
    const auto b = static_cast<std::uint8_t>(bit);
    if (head == "KP_BIT") return {ElementKind::KpBit, b};
    if (head == "KI_BIT") return {ElementKind::KiBit, b};
    if (head == "KD_BIT") return {ElementKind::KdBit, b};
    if (head == "OUT_FORCE") return {ElementKind::OutForce, b};
  }
  throw std::invalid_argument("unknown sensitive element '" + s + "'");
}

void EffectiveDut::activate(const Element& e) {
  const std::uint32_t mask = std::uint32_t{1} << e.bit;
  switch (e.kind) {
    case ElementKind::KpBit:
      kp_flip |= mask;
      break;
    case ElementKind::KiBit:
      ki_flip |= mask;
      break;
    case ElementKind::KdBit:
      kd_flip |= mask;
      break;
    case ElementKind::AccStuck:
      acc_stuck = true;
      break;
    case ElementKind::ErrPathStuckLow:
      err_stuck_low = true;
      break;
    case ElementKind::OutForce:
      out_force |= mask;
      break;
    case ElementKind::RoutingSwap:
      routing_swap = true;
      break;
  }
}

Q16 dut_step(const PidParams& params, const EffectiveDut& eff, PidState& state,
             Q16 setpoint, Q16 measured) {
  if (eff.routing_swap) std::swap(setpoint, measured);
  const Q16 e = eff.err_stuck_low ? Q16{} : setpoint - measured;
  const Q16 kp = Q16::from_raw(static_cast<std::int32_t>(params.kp.bits() ^ eff.kp_flip));
  const Q16 ki = Q16::from_raw(static_cast<std::int32_t>(params.ki.bits() ^ eff.ki_flip));
  const Q16 kd = Q16::from_raw(static_cast<std::int32_t>(params.kd.bits() ^ eff.kd_flip));

  const Q16 integ = eff.acc_stuck ? state.integrator : state.integrator + e;
  const Q16 u = kp * e + ki * integ + kd * (e - state.prev_error);
  const Q16 clamped = std::clamp(u, params.u_min, params.u_max);
  if (clamped == u) state.integrator = integ;
  state.prev_error = e;
  return Q16::from_raw(static_cast<std::int32_t>(clamped.bits() | eff.out_force));
}

Q16 pid_step(const PidParams& params, PidState& state, Q16 setpoint, Q16 measured) {
  return dut_step(params, EffectiveDut{}, state, setpoint, measured);
}

// ---------------------------------------------------------------------------

void MapParams::validate() const {
  if (unused < 0 || non_sensitive < 0 || sensitive < 0)
    throw std::invalid_argument("map: fractions must be non-negative");
  if (std::abs(unused + non_sensitive + sensitive - 1.0) > 1e-9)
    throw std::invalid_argument("map: fractions must sum to 1");
  const auto& w = weights;
  const double total = w.kp_bit + w.ki_bit + w.kd_bit + w.acc_stuck +
                       w.err_path_stuck_low + w.out_force + w.routing_swap;
  if (w.kp_bit < 0 || w.ki_bit < 0 || w.kd_bit < 0 || w.acc_stuck < 0 ||
      w.err_path_stuck_low < 0 || w.out_force < 0 || w.routing_swap < 0 ||
      (sensitive > 0 && total <= 0))
    throw std::invalid_argument("map: element weights must be non-negative and not all zero");
  if (pair_fraction < 0 || pair_fraction > 1)
    throw std::invalid_argument("map: pair_fraction must lie in [0, 1]");
}

SensitivityMap::SensitivityMap(const memory::Geometry& geometry,
                               const fault::RegionOfInterest& layout)
    : geometry_(geometry),
      layout_(layout),
      classes_(geometry.bit_count(), static_cast<std::uint8_t>(BitClass::Unused)) {
  layout.validate(geometry);
}

const Binding* SensitivityMap::binding(const BitAddress& a) const {
  if (classify(a) != BitClass::Sensitive) return nullptr;
  const auto it = bindings_.find(index(a));
  return it == bindings_.end() ? nullptr : &it->second;
}

void SensitivityMap::unbind(const BitAddress& a) {
  const auto it = bindings_.find(index(a));
  if (it == bindings_.end()) return;
  auto& members = groups_[it->second.group];
  std::erase(members, a);
  bindings_.erase(it);
}

void SensitivityMap::set_unused(const BitAddress& a) {
  geometry_.bit(a.frame, a.bit);
  unbind(a);
  classes_[index(a)] = static_cast<std::uint8_t>(BitClass::Unused);
}

void SensitivityMap::set_non_sensitive(const BitAddress& a) {
  geometry_.bit(a.frame, a.bit);
  unbind(a);
  classes_[index(a)] = static_cast<std::uint8_t>(BitClass::NonSensitive);
}

std::uint32_t SensitivityMap::bind(std::span<const BitAddress> members,
                                   const Element& element) {
  if (members.empty()) throw std::invalid_argument("map: empty binding group");
  for (const auto& a : members) geometry_.bit(a.frame, a.bit);
  const auto group = static_cast<std::uint32_t>(groups_.size());
  groups_.emplace_back();
  for (const auto& a : members) {
    unbind(a);
    classes_[index(a)] = static_cast<std::uint8_t>(BitClass::Sensitive);
    bindings_[index(a)] = Binding{element, group};
    groups_[group].push_back(a);
  }
  return group;
}

std::optional<BitAddress> SensitivityMap::find_single(const Element& element) const {
  std::optional<BitAddress> best;
  for (const auto& members : groups_) {
    if (members.size() != 1) continue;
    const auto* b = binding(members[0]);
    if (b == nullptr || b->element != element) continue;
    if (!best || members[0] < *best) best = members[0];
  }
  return best;
}

std::vector<std::uint32_t> SensitivityMap::paired_groups() const {
  std::vector<std::uint32_t> out;
  for (std::uint32_t g = 0; g < groups_.size(); ++g)
    if (groups_[g].size() > 1) out.push_back(g);
  return out;
}

MapStats SensitivityMap::stats() const {
  MapStats s;
  for (std::uint32_t f = layout_.frame_lo; f < layout_.frame_hi; ++f)
    for (std::uint32_t b = layout_.bit_lo; b < layout_.bit_hi; ++b) {
      ++s.layout_bits;
      switch (classify({f, b})) {
        case BitClass::Unused:
          ++s.unused;
          break;
        case BitClass::NonSensitive:
          ++s.non_sensitive;
          break;
        case BitClass::Sensitive:
          ++s.sensitive;
          break;
      }
    }
  s.paired_groups = paired_groups().size();
  return s;
}

namespace {

Element draw_element(Rng& rng, const ElementWeights& w) {
  const double cumulative[kElementKindCount] = {
      w.kp_bit,
      w.kp_bit + w.ki_bit,
      w.kp_bit + w.ki_bit + w.kd_bit,
      w.kp_bit + w.ki_bit + w.kd_bit + w.acc_stuck,
      w.kp_bit + w.ki_bit + w.kd_bit + w.acc_stuck + w.err_path_stuck_low,
      w.kp_bit + w.ki_bit + w.kd_bit + w.acc_stuck + w.err_path_stuck_low + w.out_force,
      w.kp_bit + w.ki_bit + w.kd_bit + w.acc_stuck + w.err_path_stuck_low + w.out_force +
          w.routing_swap,
  };
  const double r = rng.uniform01() * cumulative[kElementKindCount - 1];
  int k = 0;
  while (k < kElementKindCount - 1 && r >= cumulative[k]) ++k;
  const auto kind = static_cast<ElementKind>(k);
  // always consume the bit draw so every layout bit uses the same count
  auto bit = static_cast<std::uint8_t>(rng.uniform_below(32));
  if (kind != ElementKind::KpBit && kind != ElementKind::KiBit &&
      kind != ElementKind::KdBit && kind != ElementKind::OutForce)
    bit = 0;
  return {kind, bit};
}

}  // namespace

SensitivityMap build_default_map(const MapParams& params,
                                 const memory::Geometry& geometry,
                                 const fault::RegionOfInterest& layout) {
  params.validate();
  SensitivityMap map(geometry, layout);
  Rng rng(params.seed);
  std::vector<BitAddress> pairable;
  // sensitive bits take the top of the unit interval, so raising the
  // sensitive fraction under a fixed seed only adds sensitive bits
  const double t_unused = params.unused;
  const double t_sensitive = 1.0 - params.sensitive;
  for (std::uint32_t f = layout.frame_lo; f < layout.frame_hi; ++f) {
    for (std::uint32_t b = layout.bit_lo; b < layout.bit_hi; ++b) {
      const BitAddress a{f, b};
      const double u = rng.uniform01();
      const Element e = draw_element(rng, params.weights);
      const double u_pair = rng.uniform01();
      if (params.sensitive <= 0 || u < t_sensitive) {
        if (u >= t_unused || params.unused <= 0) map.set_non_sensitive(a);
        continue;
      }
      if (e.kind == ElementKind::ErrPathStuckLow && u_pair < params.pair_fraction) {
        pairable.push_back(a);
        continue;
      }
      const BitAddress single[] = {a};
      map.bind(single, e);
    }
  }
  // pair up redundant-route bits in scan order; an odd leftover stays single
  const Element err{ElementKind::ErrPathStuckLow, 0};
  std::size_t i = 0;
  for (; i + 1 < pairable.size(); i += 2) {
    const BitAddress pair[] = {pairable[i], pairable[i + 1]};
    map.bind(pair, err);
  }
  if (i < pairable.size()) {
    const BitAddress single[] = {pairable[i]};
    map.bind(single, err);
  }
  return map;
}

EffectiveDut apply_corruptions(const SensitivityMap& map,
                               const std::set<BitAddress>& diff) {
  EffectiveDut eff;
  std::map<std::uint32_t, std::size_t> group_hits;
  for (const auto& a : diff) {
    if (!map.geometry().contains(a)) continue;
    const Binding* b = map.binding(a);
    if (b == nullptr) continue;
    const std::size_t need = map.group_members(b->group).size();
    if (need == 1 || ++group_hits[b->group] == need) eff.activate(b->element);
  }
  return eff;
}

bool touches_sensitive(const SensitivityMap& map, std::span<const BitAddress> cells) {
  return std::any_of(cells.begin(), cells.end(), [&](const BitAddress& a) {
    return map.geometry().contains(a) && map.classify(a) == BitClass::Sensitive;
  });
}

// ---------------------------------------------------------------------------

void SquareWave::validate() const {
  if (half_period < 1) throw std::invalid_argument("workload: half_period must be >= 1");
}

TraceSample CruiseLoop::step(Q16 setpoint) {
  const Q16 measured = plant_.speed();
  if (io_.reset) {
    state_ = PidState{};
    io_.reset = false;
  }
  io_.input = setpoint;
  if (io_.enable) io_.output = dut_step(params_, eff_, state_, setpoint, measured);
  plant_step(plant_, io_.output);
  return {setpoint, measured, io_.output};
}

Trace simulate_nominal(const PidParams& params, const PlantModel& plant,
                       const SquareWave& workload, Tick duration) {
  CruiseLoop loop(params, plant);
  Trace trace;
  trace.reserve(static_cast<std::size_t>(duration));
  for (Tick t = 0; t < duration; ++t) trace.push_back(loop.step(workload.at(t)));
  return trace;
}

std::string format_q16(Q16 v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v.to_double());
  return std::string(buf, res.ptr);
}

void write_trace_csv(const std::filesystem::path& path, const Trace& trace,
                     const Trace* goldrun, const std::string& preamble) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trace " + path.string());
  out << preamble << "tick,setpoint,measured_speed,actuation,diverged_flag\n";
  for (std::size_t t = 0; t < trace.size(); ++t) {
    const auto& s = trace[t];
    const bool diverged = goldrun != nullptr && t < goldrun->size() &&
                          (*goldrun)[t].actuation != s.actuation;
    out << t << ',' << format_q16(s.setpoint) << ',' << format_q16(s.measured) << ','
        << format_q16(s.actuation) << ',' << (diverged ? 1 : 0) << '\n';
  }
}

}  // namespace seuscrub::dut
