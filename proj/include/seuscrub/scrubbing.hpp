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
#include <deque>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "seuscrub/config_memory.hpp"
#include "seuscrub/dut_cruise.hpp"
#include "seuscrub/environment.hpp"
#include "seuscrub/time.hpp"

namespace seuscrub::scrub {

/// Configuration-port timing and energy per frame operation.
struct PortCostModel {
  Tick t_frame_read = 1;
  Tick t_frame_write = 1;
  double energy_read = 1.0;
  double energy_write = 2.0;

  void validate() const;
  bool operator==(const PortCostModel&) const = default;
};

enum class ActionKind { FullRestore, FrameRestore, FrameRepair, ReadOnlyScan };

std::string to_string(ActionKind kind);

struct ScrubAction {
  ActionKind kind = ActionKind::ReadOnlyScan;
  std::vector<std::uint32_t> frames;  // frames read or written
  std::uint32_t position = 0;         // FrameRepair: corrected bit
  Tick issued_at = 0;
  Tick port_busy = 0;
  double energy = 0.0;

  std::size_t frames_touched() const { return frames.size(); }
  Tick port_free_at() const { return issued_at + port_busy; }
  bool operator==(const ScrubAction&) const = default;
};

/// What a policy may observe besides the memory itself.
struct Observation {
  const env::SensorSample* sample = nullptr;
  std::span<const dut::DutInterface> io_window;  // DUT I/O since the last step
};

/// Half-open frame range.
struct FrameRange {
  std::uint32_t lo = 0;
  std::uint32_t hi = 0;

  std::uint32_t size() const { return hi - lo; }
  bool operator==(const FrameRange&) const = default;
};

/// Strategy deciding when and which frames to scrub. step() is only called
/// while the configuration port is idle; returned actions are laid out back
/// to back from now and their memory effects are already applied.
class ScrubPolicy {
 public:
  virtual ~ScrubPolicy() = default;

  virtual std::vector<ScrubAction> step(memory::ConfigMemory& mem, Tick now,
                                        Tick idle_window, const Observation& obs) = 0;

  /// Ticks between consecutive decision windows (sizes the idle window).
  virtual Tick window() const { return 1; }
  virtual std::string label() const = 0;

  /// Frames that could not be repaired in place and were rewritten instead.
  std::uint64_t uncorrectable_events() const { return uncorrectable_; }

 protected:
  std::uint64_t uncorrectable_ = 0;
};

/// Fires at anchor + period; small port delays keep the original alignment,
/// larger slips re-anchor at the firing tick instead of bursting to catch up.
class PeriodicTrigger {
 public:
  bool due(Tick now, Tick period) const { return now >= anchor_ + period; }
  void fire(Tick now, Tick period) {
    const Tick scheduled = anchor_ + period;
    anchor_ = (now - scheduled < period) ? scheduled : now;
  }
  void rearm(Tick now) { anchor_ = now; }

 private:
  Tick anchor_ = 0;
};

/// Helpers shared by policies; each applies its effect to mem and returns the
/// action issued at `at`.
ScrubAction restore_full(memory::ConfigMemory& mem, Tick at, const PortCostModel& cost);
ScrubAction restore_frames(memory::ConfigMemory& mem, std::vector<std::uint32_t> frames,
                           Tick at, const PortCostModel& cost);
ScrubAction read_scan(const FrameRange& range, Tick at, const PortCostModel& cost);

enum class PolicyKind {
  None,
  PeriodicBlindFull,
  PeriodicBlindPartial,
  ReadbackCompare,
  SecDedRepair,
  Budgeted,
  FpScrub,
};

/// Parsed policy selector, e.g. "blind_full:100", "budgeted:10:3".
struct PolicySpec {
  PolicyKind kind = PolicyKind::None;
  Tick period = 0;            // periodic kinds; scan period for secded
  FrameRange frames;          // blind_partial subset; empty = protected region
  Tick window = 0;            // budgeted
  std::uint32_t k_max = 0;    // budgeted

  static PolicySpec parse(const std::string& text);
  std::string label() const;
  bool operator==(const PolicySpec&) const = default;
};

class NoScrub final : public ScrubPolicy {
 public:
  std::vector<ScrubAction> step(memory::ConfigMemory&, Tick, Tick, const Observation&) override {
    return {};
  }
  std::string label() const override { return "none"; }
};

class PeriodicBlindFull final : public ScrubPolicy {
 public:
  PeriodicBlindFull(Tick period, const PortCostModel& cost);
  std::vector<ScrubAction> step(memory::ConfigMemory& mem, Tick now, Tick idle_window,
                                const Observation& obs) override;
  std::string label() const override;

 private:
  Tick period_;
  PortCostModel cost_;
  PeriodicTrigger trigger_;
};

class PeriodicBlindPartial final : public ScrubPolicy {
 public:
  PeriodicBlindPartial(Tick period, FrameRange frames, const PortCostModel& cost);
  std::vector<ScrubAction> step(memory::ConfigMemory& mem, Tick now, Tick idle_window,
                                const Observation& obs) override;
  std::string label() const override;

 private:
  Tick period_;
  FrameRange frames_;
  PortCostModel cost_;
  PeriodicTrigger trigger_;
};

class ReadbackCompare final : public ScrubPolicy {
 public:
  ReadbackCompare(Tick period, const PortCostModel& cost);
  std::vector<ScrubAction> step(memory::ConfigMemory& mem, Tick now, Tick idle_window,
                                const Observation& obs) override;
  std::string label() const override;

 private:
  Tick period_;
  PortCostModel cost_;
  PeriodicTrigger trigger_;
};

/// Readback scan with per-frame SEC-DED decode. Single errors are repaired by
/// read-modify-write; each repair is checked against the frame's golden CRC
/// first, and frames that are uncorrectable or would be miscorrected are
/// rewritten from golden.
class SecDedRepair final : public ScrubPolicy {
 public:
  SecDedRepair(Tick scan_period, const PortCostModel& cost);
  std::vector<ScrubAction> step(memory::ConfigMemory& mem, Tick now, Tick idle_window,
                                const Observation& obs) override;
  std::string label() const override;

 private:
  Tick period_;
  PortCostModel cost_;
  PeriodicTrigger trigger_;
};

/// Rewrites at most min(k_max, idle_window / t_frame_write) dirty frames per
/// window, oldest dirty first; the rest carries over. Knows the dirty set.
class Budgeted final : public ScrubPolicy {
 public:
  Budgeted(Tick window, std::uint32_t k_max, const PortCostModel& cost);
  std::vector<ScrubAction> step(memory::ConfigMemory& mem, Tick now, Tick idle_window,
                                const Observation& obs) override;
  Tick window() const override { return window_; }
  std::string label() const override;

  /// Frames still queued, oldest first.
  const std::deque<std::uint32_t>& queue() const { return queue_; }

 private:
  void refresh_queue(const memory::ConfigMemory& mem);

  Tick window_;
  std::uint32_t k_max_;
  PortCostModel cost_;
  PeriodicTrigger trigger_;
  std::deque<std::uint32_t> queue_;
};

/// Builds any non-fpScrub policy. protected_frames is the default subset.
std::unique_ptr<ScrubPolicy> make_policy(const PolicySpec& spec, const PortCostModel& cost,
                                         const FrameRange& protected_frames);

/// Dirty frames left after w windows at k frames per window.
std::uint64_t budgeted_progress(std::uint64_t dirty_frames, std::uint64_t k_per_window,
                                std::uint64_t windows);

/// CSV: issued_at,kind,frames_touched,port_busy,energy
std::string scrub_log_csv(std::span<const ScrubAction> actions);

}  // namespace seuscrub::scrub
