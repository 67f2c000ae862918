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

#include <gtest/gtest.h>

#include <cmath>

#include "seuscrub/fpscrub.hpp"

using namespace seuscrub;
using namespace seuscrub::fpscrub;

namespace {

env::SensorSample sample(Tick t, double flux, double temp = 40.0) {
  env::SensorSample s;
  s.t = t;
  s.flux = flux;
  s.temperature = temp;
  return s;
}

dut::DutInterface io(double in, double out) {
  dut::DutInterface x;
  x.input = Q16::from_double(in);
  x.output = Q16::from_double(out);
  return x;
}

memory::ConfigMemory small_memory() {
  return memory::build_memory(48, 64, memory::BitMatrix::random(48, 64, 2));
}

const scrub::PortCostModel kCost;

}  // namespace

TEST(Hazard, BenignSteadyStateIsFluxWeight) {
  FpScrubConfig cfg;
  HazardState st;
  for (Tick t = 0; t < 10; ++t) {
    const auto h = update_hazard(cfg, st, sample(t, 1.0, cfg.t_base));
    EXPECT_DOUBLE_EQ(h.value, cfg.w_f);
    EXPECT_DOUBLE_EQ(h.temp_term, 0.0);
    EXPECT_DOUBLE_EQ(h.voltage_term, 0.0);
  }
}

TEST(Hazard, FluxStepFollowsEwmaClosedForm) {
  FpScrubConfig cfg;
  HazardState st;
  update_hazard(cfg, st, sample(0, 1.0));
  double prev = hazard_of(cfg, st).value;
  for (int n = 1; n <= 200; ++n) {
    const double h = update_hazard(cfg, st, sample(n, 10.0)).value;
    const double closed = cfg.w_f * (10.0 - 9.0 * std::pow(1.0 - cfg.alpha, n));
    EXPECT_NEAR(h, closed, 1e-9) << n;
    EXPECT_GT(h, prev);
    prev = h;
  }
  EXPECT_NEAR(prev, 10.0 * cfg.w_f, 1e-6);
}

TEST(Hazard, TermsFollowFormula) {
  FpScrubConfig cfg;
  HazardState st;
  auto s = sample(0, 2.0, 60.0);
  s.converter_voltages[2] = 3.3 * 0.9;  // 10% low = 2 units of 5%
  const auto h = update_hazard(cfg, st, s);
  EXPECT_NEAR(voltage_deviation_norm(s), 2.0, 1e-12);
  EXPECT_NEAR(h.flux_term, 2.0 * cfg.w_f, 1e-12);
  EXPECT_NEAR(h.temp_term, cfg.w_t * 20.0 / cfg.t_span, 1e-12);
  EXPECT_NEAR(h.voltage_term, 2.0 * cfg.w_v, 1e-12);
  EXPECT_NEAR(h.value, h.flux_term + h.temp_term + h.voltage_term, 1e-12);
}

TEST(Hazard, AlphaOneIsMemoryless) {
  FpScrubConfig cfg;
  cfg.alpha = 1.0;
  HazardState st;
  update_hazard(cfg, st, sample(0, 7.0, 90.0));
  const auto h = update_hazard(cfg, st, sample(1, 3.0, 50.0));
  HazardState fresh;
  EXPECT_DOUBLE_EQ(h.value, update_hazard(cfg, fresh, sample(1, 3.0, 50.0)).value);
}

TEST(Schedule, EndpointsAndGeometricMidpoint) {
  FpScrubConfig cfg;
  EXPECT_EQ(schedule_period(cfg, 0.0), cfg.p_max);
  EXPECT_EQ(schedule_period(cfg, cfg.theta_low), cfg.p_max);
  EXPECT_EQ(schedule_period(cfg, cfg.theta_high), cfg.p_min);
  EXPECT_EQ(schedule_period(cfg, 100.0), cfg.p_min);
  const double mid = (cfg.theta_low + cfg.theta_high) / 2;
  EXPECT_EQ(schedule_period(cfg, mid),
            std::llround(std::sqrt(static_cast<double>(cfg.p_min * cfg.p_max))));
}

TEST(Schedule, MonotoneAndContained) {
  FpScrubConfig cfg;
  Tick prev = schedule_period(cfg, -1.0);
  for (double s = -1.0; s < 10.0; s += 0.001) {
    const Tick p = schedule_period(cfg, s);
    EXPECT_LE(p, prev);
    EXPECT_GE(p, cfg.p_min);
    EXPECT_LE(p, cfg.p_max);
    prev = p;
  }
}

TEST(Config, Validation) {
  FpScrubConfig c;
  c.alpha = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  FpScrubConfig d;
  d.p_min = 500;
  d.p_max = 100;
  EXPECT_THROW(d.validate(), std::invalid_argument);
  FpScrubConfig e;
  e.theta_low = 7;
  EXPECT_THROW(e.validate(), std::invalid_argument);
}

TEST(IoMonitor, Verdicts) {
  const IoBounds b;
  EXPECT_FALSE(io_monitor(b, {}).violation);
  const std::vector<dut::DutInterface> ok{io(20, 50), io(15, -99)};
  EXPECT_FALSE(io_monitor(b, ok).violation);
  const std::vector<dut::DutInterface> hot{io(20, 50), io(20, 300)};
  const auto v = io_monitor(b, hot);
  EXPECT_TRUE(v.violation);
  EXPECT_NE(v.detail.find("output"), std::string::npos);
  const std::vector<dut::DutInterface> bad_in{io(-5, 0)};
  EXPECT_TRUE(io_monitor(b, bad_in).violation);
}

TEST(Policy, ViolationTriggersImmediateTargetedScrub) {
  auto mem = small_memory();
  const std::vector<memory::BitAddress> cells{{10, 3}, {30, 7}, {45, 1}};
  mem.flip_bits(cells);
  FpScrubPolicy p(FpScrubConfig{}, {8, 40}, kCost);
  const auto s = sample(0, 1.0);
  const std::vector<dut::DutInterface> window{io(20, 150)};
  const auto acts = p.step(mem, 5, 1, {&s, window});
  ASSERT_EQ(acts.size(), 2u);
  EXPECT_EQ(acts[0].kind, scrub::ActionKind::ReadOnlyScan);
  EXPECT_EQ(acts[0].frames.size(), 32u);
  EXPECT_EQ(acts[1].frames, (std::vector<std::uint32_t>{10, 30}));
  EXPECT_EQ(mem.diff(), (std::set<memory::BitAddress>{{45, 1}}));
  ASSERT_EQ(p.decisions().size(), 1u);
  EXPECT_EQ(p.decisions()[0].reason, TriggerReason::IoViolation);
  EXPECT_EQ(p.current_period(), FpScrubConfig{}.p_min);

  // cooldown pins the period even though the score is benign
  const auto later = p.step(mem, 600, 1, {&s, {}});
  EXPECT_EQ(p.current_period(), FpScrubConfig{}.p_min);
  ASSERT_EQ(later.size(), 1u);
  EXPECT_EQ(p.decisions().back().reason, TriggerReason::Schedule);
  p.step(mem, 1100, 1, {&s, {}});
  EXPECT_EQ(p.current_period(), FpScrubConfig{}.p_max);
}

TEST(Policy, BenignScheduleUsesLongPeriod) {
  auto mem = small_memory();
  FpScrubPolicy p(FpScrubConfig{}, {8, 40}, kCost);
  std::vector<Tick> fired;
  for (Tick t = 0; t < 30000; ++t) {
    const auto s = sample(t / 100 * 100, 1.0);
    for (const auto& a : p.step(mem, t, 1, {&s, {}})) fired.push_back(a.issued_at);
  }
  EXPECT_EQ(fired, (std::vector<Tick>{10000, 20000}));
  ASSERT_EQ(p.decisions().size(), 2u);
  EXPECT_EQ(p.decisions()[0].period, 10000);
}

TEST(Policy, FallbackMatchesBlindPartialAtMinimumPeriod) {
  FpScrubConfig cfg;
  cfg.theta_low = cfg.theta_high = 0.0;
  cfg.io_bounds.reset();
  auto m1 = small_memory();
  auto m2 = small_memory();
  FpScrubPolicy fp(cfg, {8, 40}, kCost);
  scrub::PeriodicBlindPartial bp(cfg.p_min, {8, 40}, kCost);
  std::vector<scrub::ScrubAction> a1, a2;
  Tick free1 = 0, free2 = 0;
  for (Tick t = 0; t < 5000; ++t) {
    const auto s = sample(t / 100 * 100, t > 2000 ? 10.0 : 1.0);
    if (t >= free1)
      for (auto& a : fp.step(m1, t, 1, {&s, {}})) {
        free1 = a.port_free_at();
        a1.push_back(a);
      }
    if (t >= free2)
      for (auto& a : bp.step(m2, t, 1, {&s, {}})) {
        free2 = a.port_free_at();
        a2.push_back(a);
      }
  }
  EXPECT_FALSE(a1.empty());
  EXPECT_EQ(scrub::scrub_log_csv(a1), scrub::scrub_log_csv(a2));
}

TEST(Policy, SwappablePredictor) {
  class Fixed final : public Predictor {
   public:
    HazardScore observe(const env::SensorSample&) override { return current(); }
    HazardScore current() const override { return {100.0, 100.0, 0, 0}; }
    const HazardState& state() const override { return st_; }

   private:
    HazardState st_{true, 100.0, 40.0, 0.0};
  };
  auto mem = small_memory();
  FpScrubPolicy p(FpScrubConfig{}, {8, 40}, kCost, std::make_unique<Fixed>());
  const auto s = sample(0, 1.0);
  p.step(mem, 0, 1, {&s, {}});
  EXPECT_EQ(p.current_period(), FpScrubConfig{}.p_min);
}

TEST(DecisionLog, Format) {
  const std::vector<Decision> d{{100, 1.0, 40.0, 0.0, 1.0, 10000, TriggerReason::Schedule},
                                {250, 2.5, 41.0, 0.5, 3.5, 100, TriggerReason::IoViolation}};
  EXPECT_EQ(decision_log_csv(d),
            "t,flux_ewma,temp_ewma,volt_dev,score,period,trigger_reason\n"
            "100,1,40,0,1,10000,schedule\n"
            "250,2.5,41,0.5,3.5,100,io_violation\n");
}
