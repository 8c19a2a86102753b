/*
 * Copyright 2026 The fdsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "fdsim/transient.hpp"

#include <cmath>
#include <numbers>

#include "fdsim/analysis.hpp"
#include "fdsim/errors.hpp"
#include "fdsim/mna.hpp"
#include "gtest/gtest.h"

namespace fdsim {
namespace {

constexpr double kR = 1e3;
constexpr double kC = 1e-9;
constexpr double kPi = std::numbers::pi;
constexpr double kF0 = 159154.94309189534;

Netlist divider(Waveform w) {
  Netlist net;
  const NodeId gnd{"0"};
  net.add(VSource{"V1", NodeId{"in"}, gnd, w});
  net.add(Resistor{"R1", NodeId{"in"}, NodeId{"mid"}, 1e3});
  net.add(Resistor{"R2", NodeId{"mid"}, gnd, 1e3});
  net.add_probe("MID", "mid");
  net.add_probe("IN", "in");
  return net;
}

double wrap180(double d) {
  while (d > 180.0) d -= 360.0;
  while (d <= -180.0) d += 360.0;
  return d;
}

TEST(SimulateTest, ResistiveDividerTracksSource) {
  const double f = 1e3;
  const auto res = simulate(divider(SinWave{0.2, 1.0, f, 30.0}), 1e-5, 2e-3);
  ASSERT_EQ(res.times.size(), 201u);
  const auto& mid = res.trace("MID");
  const auto& in = res.trace("IN");
  for (std::size_t i = 0; i < res.times.size(); ++i) {
    const double t = res.times[i];
    const double v = 0.2 + std::sin(2 * kPi * f * t + kPi / 6);
    EXPECT_NEAR(in[i], v, 1e-12);
    EXPECT_NEAR(mid[i], v / 2, 1e-12);
  }
  EXPECT_THROW(res.trace("nope"), DomainError);
}

TEST(SimulateTest, RejectsBadArguments) {
  const auto net = divider(SinWave{0, 1, 1e3, 0});
  EXPECT_THROW(simulate(net, 0.0, 1e-3), DomainError);
  EXPECT_THROW(simulate(net, 1e-3, 5e-3), DomainError);
  EXPECT_THROW(simulate(divider(AcWave{}), 1e-5, 1e-3), DomainError);
}

TEST(SimulateTest, Fig2AmplitudeIsUnity) {
  const double h = 1.0 / (kF0 * 200);
  const auto res = simulate(build_fig2_netlist(kR, kC), h, 30.0 / kF0);
  for (const char* p : {"VOUT1", "VOUT2"}) {
    const auto m = measure_phasor(res, p, kF0, 20, 10);
    EXPECT_NEAR(m.amplitude, 1.0, 0.005) << p;
  }
}

TEST(PhasorTest, SineAndCosine) {
  const double f = 1e3;
  const auto s = simulate(divider(SinWave{0, 2, f, 0}), 1e-5, 5e-3);
  const auto ms = measure_phasor(s, "IN", f, 1, 3);
  EXPECT_NEAR(ms.amplitude, 2.0, 1e-12);
  EXPECT_NEAR(ms.phase_deg, 0.0, 1e-9);
  const auto c = simulate(divider(SinWave{0, 2, f, 90}), 1e-5, 5e-3);
  EXPECT_NEAR(measure_phasor(c, "IN", f, 1, 3).phase_deg, 90.0, 1e-9);
  const auto m = simulate(divider(SinWave{0, 2, f, -120}), 1e-5, 5e-3);
  EXPECT_NEAR(measure_phasor(m, "IN", f, 1, 3).phase_deg, -120.0, 1e-9);
}

TEST(PhasorTest, WindowErrors) {
  const auto s = simulate(divider(SinWave{0, 1, 1e3, 0}), 1e-5, 5e-3);
  EXPECT_THROW(measure_phasor(s, "IN", 1.5e3, 0, 1), DomainError);
  EXPECT_THROW(measure_phasor(s, "IN", 1e3, 3, 3), DomainError);
  EXPECT_THROW(measure_phasor(s, "IN", 1e3, -1, 1), DomainError);
  EXPECT_THROW(measure_phasor(s, "IN", 0.0, 0, 1), DomainError);
}

TEST(PhasorTest, Fig2QuadratureAtPole) {
  const double h = 1.0 / (kF0 * 200);
  const auto res = simulate(build_fig2_netlist(kR, kC), h, 30.0 / kF0);
  EXPECT_NEAR(measure_phasor(res, "VOUT1", kF0, 20, 10).phase_deg, -90.0, 0.5);
  EXPECT_NEAR(measure_phasor(res, "VOUT2", kF0, 20, 10).phase_deg, 90.0, 0.5);
}

TEST(ConsistencyTest, TransientMatchesAc) {
  const auto net = build_fig2_netlist(kR, kC);
  for (double f : {1e4, 3e4, 1e5, 3e5, 1e6}) {
    Netlist driven = net;
    for (auto& e : driven.mutable_elements()) {
      if (auto* v = std::get_if<VSource>(&e)) v->waveform = SinWave{0, 1, f, 0};
    }
    const auto res = simulate(driven, 1.0 / (f * 500), 30.0 / f);
    for (const char* p : {"VOUT1", "VOUT2"}) {
      const Complex g = ac_gain(net, p, 2 * kPi * f);
      const auto m = measure_phasor(res, p, f, 20, 10);
      EXPECT_NEAR(m.amplitude, std::abs(g), 1e-3) << p << " @ " << f;
      EXPECT_NEAR(wrap180(m.phase_deg - std::arg(g) * 180 / kPi), 0.0, 0.05)
          << p << " @ " << f;
    }
  }
}

TEST(ConsistencyTest, PhaseErrorIsSecondOrder) {
  const auto net = build_fig2_netlist(kR, kC);
  auto err = [&](int per_period) {
    const auto res = simulate(net, 1.0 / (kF0 * per_period), 30.0 / kF0);
    return std::abs(measure_phasor(res, "VOUT2", kF0, 20, 10).phase_deg - 90.0);
  };
  const double ratio = err(100) / err(200);
  EXPECT_GE(ratio, 3.0);
  EXPECT_LE(ratio, 5.0);
}

TEST(ConsistencyTest, MemorylessSectionIsAlgebraic) {
  Netlist net = build_fig2_netlist(kR, kC);
  Netlist resistive;
  for (const auto& e : net.elements()) {
    if (const auto* c = std::get_if<Capacitor>(&e)) {
      resistive.add(Resistor{"RA", c->n1, c->n2, 2.2e3});
    } else {
      resistive.add(e);
    }
  }
  for (const auto& p : net.probes()) resistive.add_probe(p.label, p.node.name);
  const double f = 5e4;
  for (auto& e : resistive.mutable_elements()) {
    if (auto* v = std::get_if<VSource>(&e)) v->waveform = SinWave{0, 1, f, 0};
  }
  const double g1 = ac_gain(resistive, "VOUT1", 1.0).real();
  const double g2 = ac_gain(resistive, "VOUT2", 1.0).real();
  const auto res = simulate(resistive, 1.0 / (f * 64), 3.0 / f);
  for (std::size_t i = 0; i < res.times.size(); ++i) {
    const double vin = std::sin(2 * kPi * f * res.times[i]);
    EXPECT_NEAR(res.trace("VOUT1")[i], g1 * vin, 1e-9);
    EXPECT_NEAR(res.trace("VOUT2")[i], g2 * vin, 1e-9);
  }
}

TEST(ThdTest, PureSineHasNoDistortion) {
  const auto s = simulate(divider(SinWave{0, 1, 1e3, 0}), 1e-5, 30e-3);
  EXPECT_LT(thd(s, "IN", 1e3), 1e-9);
}

TEST(ThdTest, LinearSectionStaysClean) {
  const auto rows =
      thd_sweep(build_fig2_netlist(kR, kC), {0.1, 1.0, 5.0}, kF0);
  ASSERT_EQ(rows.size(), 3u);
  for (const auto& row : rows) {
    ASSERT_EQ(row.thd_percent.size(), 2u);
    for (double v : row.thd_percent) EXPECT_LT(v, 1e-6);
  }
}

TEST(ThdTest, SaturationGrowsMonotonically) {
  const auto net = build_fig2_netlist(kR, kC, {}, SaturationSpec{3.0});
  const auto rows = thd_sweep(net, {0.1, 0.5, 1.0, 2.0, 3.0}, kF0);
  for (std::size_t p = 0; p < 2; ++p) {
    for (std::size_t i = 1; i < rows.size(); ++i) {
      EXPECT_GT(rows[i].thd_percent[p], rows[i - 1].thd_percent[p]);
    }
  }
  EXPECT_GT(rows.back().thd_percent[1], 1.0);
}

TEST(ThdTest, EmptyAmplitudeList) {
  EXPECT_TRUE(thd_sweep(build_fig2_netlist(kR, kC), {}, kF0).empty());
}

TEST(ThdTest, Errors) {
  const auto s = simulate(divider(SinWave{0, 1, 1e3, 0}), 1e-5, 30e-3);
  Netlist quiet = divider(SinWave{0, 1, 1e3, 0});
  const auto zero = simulate(divider(SinWave{0.5, 1e-15, 1e3, 0}), 1e-5,
                             30e-3);
  EXPECT_THROW(thd(zero, "IN", 1e3), NoFundamental);
  EXPECT_THROW(thd(s, "IN", 1e3, 60), DomainError);
  EXPECT_THROW(thd(s, "IN", 1e3, 0), DomainError);
  EXPECT_THROW(thd(s, "IN", 1e3, 9, 25, 10), DomainError);
  EXPECT_THROW(thd_sweep(quiet, {1.0, 0.5}, 1e3), DomainError);
  EXPECT_THROW(thd_sweep(quiet, {1.0}, 0.0), DomainError);
  quiet.add(VSource{"V2", NodeId{"x"}, NodeId{"0"}, SinWave{0, 1, 1e3, 0}});
  quiet.add(Resistor{"RX", NodeId{"x"}, NodeId{"0"}, 1e3});
  EXPECT_THROW(thd_sweep(quiet, {1.0}, 1e3), DomainError);
}

}  // namespace
}  // namespace fdsim
