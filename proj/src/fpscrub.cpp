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

#include "seuscrub/fpscrub.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace seuscrub::fpscrub {

void FpScrubConfig::validate() const {
  if (w_f < 0 || w_t < 0 || w_v < 0)
    throw std::invalid_argument("fpscrub: weights must be >= 0");
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw std::invalid_argument("fpscrub: alpha must lie in (0, 1]");
  if (p_min < 1 || p_max < p_min)
    throw std::invalid_argument("fpscrub: need 1 <= p_min <= p_max");
  if (theta_low > theta_high)
    throw std::invalid_argument("fpscrub: theta_low must be <= theta_high");
  if (!(flux_ref > 0.0) || !(t_span > 0.0))
    throw std::invalid_argument("fpscrub: flux_ref and t_span must be > 0");
  if (cooldown < 0) throw std::invalid_argument("fpscrub: cooldown must be >= 0");
  if (io_bounds && (io_bounds->input_lo > io_bounds->input_hi ||
                    io_bounds->output_lo > io_bounds->output_hi))
    throw std::invalid_argument("fpscrub: io bounds must satisfy lo <= hi");
}

double voltage_deviation_norm(const env::SensorSample& s) {
  double worst = 0.0;
  for (std::size_t i = 0; i < env::kConverterCount; ++i) {
    const double nom = env::kNominalVoltages[i];
    worst = std::max(worst, std::abs(s.converter_voltages[i] - nom) / (0.05 * nom));
  }
  return worst;
}

HazardScore hazard_of(const FpScrubConfig& cfg, const HazardState& st) {
  HazardScore h;
  h.flux_term = cfg.w_f * st.flux_ewma / cfg.flux_ref;
  h.temp_term = cfg.w_t * std::max(0.0, st.temp_ewma - cfg.t_base) / cfg.t_span;
  h.voltage_term = cfg.w_v * st.volt_ewma;
  h.value = h.flux_term + h.temp_term + h.voltage_term;
  return h;
}

HazardScore update_hazard(const FpScrubConfig& cfg, HazardState& st,
                          const env::SensorSample& sample) {
  const double vdev = voltage_deviation_norm(sample);
  if (!st.primed) {
    st = {true, sample.flux, sample.temperature, vdev};
  } else {
    const double a = cfg.alpha;
    st.flux_ewma += a * (sample.flux - st.flux_ewma);
    st.temp_ewma += a * (sample.temperature - st.temp_ewma);
    st.volt_ewma += a * (vdev - st.volt_ewma);
  }
  return hazard_of(cfg, st);
}

Tick schedule_period(const FpScrubConfig& cfg, double score) {
  if (score >= cfg.theta_high) return cfg.p_min;
  if (score <= cfg.theta_low) return cfg.p_max;
  const double x = (score - cfg.theta_low) / (cfg.theta_high - cfg.theta_low);
  const double lp = std::log(static_cast<double>(cfg.p_max)) +
                    x * (std::log(static_cast<double>(cfg.p_min)) -
                         std::log(static_cast<double>(cfg.p_max)));
  const auto p = static_cast<Tick>(std::llround(std::exp(lp)));
  return std::clamp(p, cfg.p_min, cfg.p_max);
}

IoVerdict io_monitor(const IoBounds& b, std::span<const dut::DutInterface> window) {
  for (const auto& io : window) {
    const double in = io.input.to_double();
    const double out = io.output.to_double();
    if (in < b.input_lo || in > b.input_hi)
      return {true, "input " + std::to_string(in) + " outside bounds"};
    if (out < b.output_lo || out > b.output_hi)
      return {true, "output " + std::to_string(out) + " outside bounds"};
  }
  return {};
}

std::string to_string(TriggerReason r) {
  return r == TriggerReason::Schedule ? "schedule" : "io_violation";
}

FpScrubPolicy::FpScrubPolicy(const FpScrubConfig& cfg, scrub::FrameRange protected_frames,
                             const scrub::PortCostModel& cost,
                             std::unique_ptr<Predictor> predictor)
    : cfg_(cfg),
      frames_(protected_frames),
      cost_(cost),
      predictor_(predictor ? std::move(predictor) : std::make_unique<EwmaPredictor>(cfg)),
      period_(cfg.p_min) {
  cfg.validate();
  if (frames_.lo >= frames_.hi) throw std::invalid_argument("fpscrub: empty protected region");
}

Decision FpScrubPolicy::decision(Tick now, TriggerReason reason) const {
  const auto& st = predictor_->state();
  return {now, st.flux_ewma, st.temp_ewma, st.volt_ewma,
          predictor_->current().value, period_, reason};
}

std::vector<scrub::ScrubAction> FpScrubPolicy::step(memory::ConfigMemory& mem, Tick now, Tick,
                                                    const scrub::Observation& obs) {
  if (frames_.hi > mem.geometry().frame_count())
    throw std::out_of_range("fpscrub: protected region exceeds device");
  if (obs.sample && obs.sample->t != last_sample_t_) {
    predictor_->observe(*obs.sample);
    last_sample_t_ = obs.sample->t;
  }
  if (predictor_->state().primed) period_ = schedule_period(cfg_, predictor_->current().value);
  if (now < cooldown_until_) period_ = cfg_.p_min;

  std::vector<std::uint32_t> frames(frames_.size());
  std::iota(frames.begin(), frames.end(), frames_.lo);

  if (cfg_.io_bounds && io_monitor(*cfg_.io_bounds, obs.io_window).violation) {
    cooldown_until_ = now + cfg_.cooldown;
    period_ = cfg_.p_min;
    trigger_.rearm(now);
    decisions_.push_back(decision(now, TriggerReason::IoViolation));
    std::vector<scrub::ScrubAction> out;
    out.push_back(scrub::read_scan(frames_, now, cost_));
    std::vector<std::uint32_t> dirty;
    for (const auto f : frames)
      if (mem.frame_diff_count(f) != 0) dirty.push_back(f);
    if (!dirty.empty())
      out.push_back(scrub::restore_frames(mem, std::move(dirty), out.back().port_free_at(), cost_));
    return out;
  }

  if (!trigger_.due(now, period_)) return {};
  trigger_.fire(now, period_);
  decisions_.push_back(decision(now, TriggerReason::Schedule));
  return {scrub::restore_frames(mem, std::move(frames), now, cost_)};
}

std::string decision_log_csv(std::span<const Decision> decisions) {
  auto fmt = [](double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, r.ptr);
  };
  std::ostringstream out;
  out << "t,flux_ewma,temp_ewma,volt_dev,score,period,trigger_reason\n";
  for (const auto& d : decisions)
    out << d.t << ',' << fmt(d.flux_ewma) << ',' << fmt(d.temp_ewma) << ',' << fmt(d.volt_dev)
        << ',' << fmt(d.score) << ',' << d.period << ',' << to_string(d.reason) << '\n';
  return out.str();
}

}  // namespace seuscrub::fpscrub
