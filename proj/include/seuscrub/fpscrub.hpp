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

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "seuscrub/environment.hpp"
#include "seuscrub/scrubbing.hpp"

namespace seuscrub::fpscrub {

struct IoBounds {
  double input_lo = 0.0;
  double input_hi = 50.0;
  double output_lo = -100.0;
  double output_hi = 100.0;

  bool operator==(const IoBounds&) const = default;
};

struct FpScrubConfig {
  double w_f = 1.0;
  double w_t = 0.5;
  double w_v = 2.0;
  double alpha = 0.1;  // EWMA factor per sample
  Tick p_min = 100;
  Tick p_max = 10000;
  double theta_low = 1.5;
  double theta_high = 6.0;
  double flux_ref = 1.0;
  double t_base = 40.0;
  double t_span = 20.0;
  std::optional<IoBounds> io_bounds = IoBounds{};
  Tick cooldown = 1000;

  void validate() const;
  bool operator==(const FpScrubConfig&) const = default;
};

struct HazardState {
  bool primed = false;
  double flux_ewma = 0.0;
  double temp_ewma = 0.0;
  double volt_ewma = 0.0;

  bool operator==(const HazardState&) const = default;
};

struct HazardScore {
  double value = 0.0;
  double flux_term = 0.0;
  double temp_term = 0.0;
  double voltage_term = 0.0;
};

/// Largest rail deviation in units of 5% of that rail's nominal.
double voltage_deviation_norm(const env::SensorSample& s);

/// Score of a state without updating it.
HazardScore hazard_of(const FpScrubConfig& cfg, const HazardState& state);

/// Folds one sample into the EWMAs (the first sample primes them) and
/// returns the new score.
HazardScore update_hazard(const FpScrubConfig& cfg, HazardState& state,
                          const env::SensorSample& sample);

Tick schedule_period(const FpScrubConfig& cfg, double score);

struct IoVerdict {
  bool violation = false;
  std::string detail;
};

IoVerdict io_monitor(const IoBounds& bounds, std::span<const dut::DutInterface> window);

/// Swappable hazard estimator.
class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual HazardScore observe(const env::SensorSample& sample) = 0;
  virtual HazardScore current() const = 0;
  virtual const HazardState& state() const = 0;
};

class EwmaPredictor final : public Predictor {
 public:
  explicit EwmaPredictor(const FpScrubConfig& cfg) : cfg_(cfg) {}
  HazardScore observe(const env::SensorSample& sample) override {
    return update_hazard(cfg_, state_, sample);
  }
  HazardScore current() const override { return hazard_of(cfg_, state_); }
  const HazardState& state() const override { return state_; }

 private:
  FpScrubConfig cfg_;
  HazardState state_;
};

enum class TriggerReason { Schedule, IoViolation };

std::string to_string(TriggerReason r);

struct Decision {
  Tick t = 0;
  double flux_ewma = 0.0;
  double temp_ewma = 0.0;
  double volt_dev = 0.0;
  double score = 0.0;
  Tick period = 0;
  TriggerReason reason = TriggerReason::Schedule;
};

/// Scheduled scrubs rewrite the protected frames like a blind partial scrub;
/// an I/O violation triggers an immediate readback of the protected frames,
/// restarts the schedule and pins the period to p_min for the cooldown.
class FpScrubPolicy final : public scrub::ScrubPolicy {
 public:
  FpScrubPolicy(const FpScrubConfig& cfg, scrub::FrameRange protected_frames,
                const scrub::PortCostModel& cost,
                std::unique_ptr<Predictor> predictor = nullptr);

  std::vector<scrub::ScrubAction> step(memory::ConfigMemory& mem, Tick now, Tick idle_window,
                                       const scrub::Observation& obs) override;
  std::string label() const override { return "fpscrub"; }

  const std::vector<Decision>& decisions() const { return decisions_; }
  Tick current_period() const { return period_; }

 private:
  Decision decision(Tick now, TriggerReason reason) const;

  FpScrubConfig cfg_;
  scrub::FrameRange frames_;
  scrub::PortCostModel cost_;
  std::unique_ptr<Predictor> predictor_;
  scrub::PeriodicTrigger trigger_;
  Tick period_;
  Tick cooldown_until_ = -1;
  Tick last_sample_t_ = -1;
  std::vector<Decision> decisions_;
};

/// CSV: t,flux_ewma,temp_ewma,volt_dev,score,period,trigger_reason
std::string decision_log_csv(std::span<const Decision> decisions);

}  // namespace seuscrub::fpscrub
