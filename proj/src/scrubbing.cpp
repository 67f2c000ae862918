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

#include "seuscrub/scrubbing.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace seuscrub::scrub {

void PortCostModel::validate() const {
  if (t_frame_read < 0 || t_frame_write < 0 || energy_read < 0 || energy_write < 0)
    throw std::invalid_argument("port cost model: all costs must be >= 0");
}

std::string to_string(ActionKind kind) {
  switch (kind) {
    case ActionKind::FullRestore:
      return "FullRestore";
    case ActionKind::FrameRestore:
      return "FrameRestore";
    case ActionKind::FrameRepair:
      return "FrameRepair";
    case ActionKind::ReadOnlyScan:
      return "ReadOnlyScan";
  }
  return "?";
}

ScrubAction restore_full(memory::ConfigMemory& mem, Tick at, const PortCostModel& cost) {
  ScrubAction a;
  a.kind = ActionKind::FullRestore;
  a.frames.resize(mem.geometry().frame_count());
  std::iota(a.frames.begin(), a.frames.end(), 0U);
  a.issued_at = at;
  a.port_busy = static_cast<Tick>(a.frames.size()) * cost.t_frame_write;
  a.energy = static_cast<double>(a.frames.size()) * cost.energy_write;
  mem.restore_all();
  return a;
}

ScrubAction restore_frames(memory::ConfigMemory& mem, std::vector<std::uint32_t> frames,
                           Tick at, const PortCostModel& cost) {
  ScrubAction a;
  a.kind = ActionKind::FrameRestore;
  a.issued_at = at;
  a.port_busy = static_cast<Tick>(frames.size()) * cost.t_frame_write;
  a.energy = static_cast<double>(frames.size()) * cost.energy_write;
  for (const auto f : frames) mem.restore_frame(f);
  a.frames = std::move(frames);
  return a;
}

ScrubAction read_scan(const FrameRange& range, Tick at, const PortCostModel& cost) {
  ScrubAction a;
  a.kind = ActionKind::ReadOnlyScan;
  a.frames.resize(range.size());
  std::iota(a.frames.begin(), a.frames.end(), range.lo);
  a.issued_at = at;
  a.port_busy = static_cast<Tick>(range.size()) * cost.t_frame_read;
  a.energy = static_cast<double>(range.size()) * cost.energy_read;
  return a;
}

namespace {

PolicySpec periodic_spec(PolicyKind kind, Tick period) {
  PolicySpec s;
  s.kind = kind;
  s.period = period;
  return s;
}

void check_period(Tick p, const char* what) {
  if (p < 1) throw std::invalid_argument(std::string(what) + " must be >= 1 tick");
}

}  // namespace

// ---------------------------------------------------------------------------

PeriodicBlindFull::PeriodicBlindFull(Tick period, const PortCostModel& cost)
    : period_(period), cost_(cost) {
  check_period(period, "blind_full period");
}

std::vector<ScrubAction> PeriodicBlindFull::step(memory::ConfigMemory& mem, Tick now, Tick,
                                                 const Observation&) {
  if (!trigger_.due(now, period_)) return {};
  trigger_.fire(now, period_);
  return {restore_full(mem, now, cost_)};
}

std::string PeriodicBlindFull::label() const { return periodic_spec(PolicyKind::PeriodicBlindFull, period_).label(); }

PeriodicBlindPartial::PeriodicBlindPartial(Tick period, FrameRange frames,
                                           const PortCostModel& cost)
    : period_(period), frames_(frames), cost_(cost) {
  check_period(period, "blind_partial period");
  if (frames.lo >= frames.hi) throw std::invalid_argument("blind_partial: empty frame subset");
}

std::vector<ScrubAction> PeriodicBlindPartial::step(memory::ConfigMemory& mem, Tick now,
                                                    Tick, const Observation&) {
  if (!trigger_.due(now, period_)) return {};
  if (frames_.hi > mem.geometry().frame_count())
    throw std::out_of_range("blind_partial: frame subset exceeds device");
  trigger_.fire(now, period_);
  std::vector<std::uint32_t> frames(frames_.size());
  std::iota(frames.begin(), frames.end(), frames_.lo);
  return {restore_frames(mem, std::move(frames), now, cost_)};
}

std::string PeriodicBlindPartial::label() const {
  auto s = periodic_spec(PolicyKind::PeriodicBlindPartial, period_);
  s.frames = frames_;
  return s.label();
}

ReadbackCompare::ReadbackCompare(Tick period, const PortCostModel& cost)
    : period_(period), cost_(cost) {
  check_period(period, "readback period");
}

std::vector<ScrubAction> ReadbackCompare::step(memory::ConfigMemory& mem, Tick now, Tick,
                                               const Observation&) {
  if (!trigger_.due(now, period_)) return {};
  trigger_.fire(now, period_);
  std::vector<ScrubAction> out;
  out.push_back(read_scan({0, mem.geometry().frame_count()}, now, cost_));
  auto dirty = mem.dirty_frames();
  if (!dirty.empty())
    out.push_back(restore_frames(mem, std::move(dirty), out.back().port_free_at(), cost_));
  return out;
}

std::string ReadbackCompare::label() const {
  return periodic_spec(PolicyKind::ReadbackCompare, period_).label();
}

SecDedRepair::SecDedRepair(Tick scan_period, const PortCostModel& cost)
    : period_(scan_period), cost_(cost) {
  check_period(scan_period, "secded scan period");
}

std::vector<ScrubAction> SecDedRepair::step(memory::ConfigMemory& mem, Tick now, Tick,
                                            const Observation&) {
  if (!trigger_.due(now, period_)) return {};
  trigger_.fire(now, period_);
  using Status = memory::DecodeResult::Status;
  std::vector<ScrubAction> out;
  out.push_back(read_scan({0, mem.geometry().frame_count()}, now, cost_));
  Tick cursor = out.back().port_free_at();
  for (std::uint32_t f = 0; f < mem.geometry().frame_count(); ++f) {
    const auto result = mem.decode_frame(f);
    if (result.status == Status::Clean) continue;
    if (result.status == Status::Corrected) {
      // verify the candidate fix before writing it back
      memory::BitMatrix scratch(1, mem.geometry().frame_size());
      const auto src = mem.live().frame(f);
      std::copy(src.begin(), src.end(), scratch.frame(0).begin());
      scratch.flip(0, result.position);
      if (memory::device_crc(scratch) == mem.golden_frame_crc(f)) {
        const memory::BitAddress fix{f, result.position};
        mem.flip_bits(std::span(&fix, 1));
        ScrubAction a;
        a.kind = ActionKind::FrameRepair;
        a.frames = {f};
        a.position = result.position;
        a.issued_at = cursor;
        a.port_busy = cost_.t_frame_write;
        a.energy = cost_.energy_write;
        cursor += a.port_busy;
        out.push_back(std::move(a));
        continue;
      }
    }
    ++uncorrectable_;
    out.push_back(restore_frames(mem, {f}, cursor, cost_));
    cursor = out.back().port_free_at();
  }
  return out;
}

std::string SecDedRepair::label() const {
  return periodic_spec(PolicyKind::SecDedRepair, period_).label();
}

Budgeted::Budgeted(Tick window, std::uint32_t k_max, const PortCostModel& cost)
    : window_(window), k_max_(k_max), cost_(cost) {
  check_period(window, "budgeted window");
  if (k_max < 1) throw std::invalid_argument("budgeted: k_max must be >= 1");
}

void Budgeted::refresh_queue(const memory::ConfigMemory& mem) {
  std::erase_if(queue_, [&](std::uint32_t f) { return mem.frame_diff_count(f) == 0; });
  for (const auto f : mem.dirty_frames())
    if (std::find(queue_.begin(), queue_.end(), f) == queue_.end()) queue_.push_back(f);
}

std::vector<ScrubAction> Budgeted::step(memory::ConfigMemory& mem, Tick now, Tick idle_window,
                                        const Observation&) {
  if (!trigger_.due(now, window_)) return {};
  trigger_.fire(now, window_);
  refresh_queue(mem);
  std::uint64_t k = k_max_;
  if (cost_.t_frame_write > 0)
    k = std::min<std::uint64_t>(k, static_cast<std::uint64_t>(std::max<Tick>(idle_window, 0) /
                                                              cost_.t_frame_write));
  k = std::min<std::uint64_t>(k, queue_.size());
  if (k == 0) return {};
  std::vector<std::uint32_t> frames(queue_.begin(), queue_.begin() + static_cast<long>(k));
  queue_.erase(queue_.begin(), queue_.begin() + static_cast<long>(k));
  return {restore_frames(mem, std::move(frames), now, cost_)};
}

std::string Budgeted::label() const {
  PolicySpec s;
  s.kind = PolicyKind::Budgeted;
  s.window = window_;
  s.k_max = k_max_;
  return s.label();
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string p;
  while (std::getline(ss, p, sep)) parts.push_back(p);
  return parts;
}

std::int64_t parse_int(const std::string& s, const std::string& ctx) {
  std::int64_t v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size())
    throw std::invalid_argument("policy '" + ctx + "': expected an integer, got '" + s + "'");
  return v;
}

}  // namespace

PolicySpec PolicySpec::parse(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.empty()) throw std::invalid_argument("empty policy selector");
  const std::string& head = parts[0];
  PolicySpec s;
  auto need = [&](std::size_t lo, std::size_t hi) {
    if (parts.size() < lo || parts.size() > hi)
      throw std::invalid_argument("policy '" + text + "': wrong number of fields");
  };
  if (head == "none") {
    need(1, 1);
    s.kind = PolicyKind::None;
  } else if (head == "blind_full") {
    need(2, 2);
    s.kind = PolicyKind::PeriodicBlindFull;
    s.period = parse_int(parts[1], text);
  } else if (head == "blind_partial") {
    need(2, 3);
    s.kind = PolicyKind::PeriodicBlindPartial;
    s.period = parse_int(parts[1], text);
    if (parts.size() == 3) {
      const auto range = split(parts[2], '-');
      if (range.size() != 2)
        throw std::invalid_argument("policy '" + text + "': frame subset must be lo-hi");
      s.frames = {static_cast<std::uint32_t>(parse_int(range[0], text)),
                  static_cast<std::uint32_t>(parse_int(range[1], text))};
      if (s.frames.lo >= s.frames.hi)
        throw std::invalid_argument("policy '" + text + "': empty frame subset");
    }
  } else if (head == "readback") {
    need(2, 2);
    s.kind = PolicyKind::ReadbackCompare;
    s.period = parse_int(parts[1], text);
  } else if (head == "secded") {
    need(2, 2);
    s.kind = PolicyKind::SecDedRepair;
    s.period = parse_int(parts[1], text);
  } else if (head == "budgeted") {
    need(3, 3);
    s.kind = PolicyKind::Budgeted;
    s.window = parse_int(parts[1], text);
    const auto k = parse_int(parts[2], text);
    if (k < 1) throw std::invalid_argument("policy '" + text + "': k_max must be >= 1");
    s.k_max = static_cast<std::uint32_t>(k);
  } else if (head == "fpscrub") {
    need(1, 1);
    s.kind = PolicyKind::FpScrub;
  } else {
    throw std::invalid_argument("unknown policy '" + text + "'");
  }
  if ((s.kind == PolicyKind::PeriodicBlindFull || s.kind == PolicyKind::PeriodicBlindPartial ||
       s.kind == PolicyKind::ReadbackCompare || s.kind == PolicyKind::SecDedRepair) &&
      s.period < 1)
    throw std::invalid_argument("policy '" + text + "': period must be >= 1");
  if (s.kind == PolicyKind::Budgeted && s.window < 1)
    throw std::invalid_argument("policy '" + text + "': window must be >= 1");
  return s;
}

std::string PolicySpec::label() const {
  switch (kind) {
    case PolicyKind::None:
      return "none";
    case PolicyKind::PeriodicBlindFull:
      return "blind_full:" + std::to_string(period);
    case PolicyKind::PeriodicBlindPartial:
      if (frames.lo < frames.hi)
        return "blind_partial:" + std::to_string(period) + ":" + std::to_string(frames.lo) +
               "-" + std::to_string(frames.hi);
      return "blind_partial:" + std::to_string(period);
    case PolicyKind::ReadbackCompare:
      return "readback:" + std::to_string(period);
    case PolicyKind::SecDedRepair:
      return "secded:" + std::to_string(period);
    case PolicyKind::Budgeted:
      return "budgeted:" + std::to_string(window) + ":" + std::to_string(k_max);
    case PolicyKind::FpScrub:
      return "fpscrub";
  }
  return "?";
}

std::unique_ptr<ScrubPolicy> make_policy(const PolicySpec& spec, const PortCostModel& cost,
                                         const FrameRange& protected_frames) {
  switch (spec.kind) {
    case PolicyKind::None:
      return std::make_unique<NoScrub>();
    case PolicyKind::PeriodicBlindFull:
      return std::make_unique<PeriodicBlindFull>(spec.period, cost);
    case PolicyKind::PeriodicBlindPartial:
      return std::make_unique<PeriodicBlindPartial>(
          spec.period, spec.frames.lo < spec.frames.hi ? spec.frames : protected_frames, cost);
    case PolicyKind::ReadbackCompare:
      return std::make_unique<ReadbackCompare>(spec.period, cost);
    case PolicyKind::SecDedRepair:
      return std::make_unique<SecDedRepair>(spec.period, cost);
    case PolicyKind::Budgeted:
      return std::make_unique<Budgeted>(spec.window, spec.k_max, cost);
    case PolicyKind::FpScrub:
      break;
  }
  throw std::invalid_argument("make_policy: fpscrub is built by the fpscrub module");
}

std::uint64_t budgeted_progress(std::uint64_t dirty_frames, std::uint64_t k_per_window,
                                std::uint64_t windows) {
  const std::uint64_t done = k_per_window * windows;
  return done >= dirty_frames ? 0 : dirty_frames - done;
}

std::string scrub_log_csv(std::span<const ScrubAction> actions) {
  std::ostringstream out;
  out << "issued_at,kind,frames_touched,port_busy,energy\n";
  for (const auto& a : actions) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof(buf), a.energy);
    out << a.issued_at << ',' << to_string(a.kind) << ',' << a.frames_touched() << ','
        << a.port_busy << ',' << std::string(buf, r.ptr) << '\n';
  }
  return out.str();
}

}  // namespace seuscrub::scrub
