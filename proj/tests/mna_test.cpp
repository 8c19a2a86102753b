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

#include "fdsim/mna.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "fdsim/errors.hpp"
#include "gtest/gtest.h"
#include "oracles.hpp"

namespace fdsim {
namespace {

using testing::rel_err;
using testing::section_by_cramer;

constexpr double kR = 1e3;
constexpr double kC = 1e-9;
constexpr double kPi = std::numbers::pi;
const NodeId kGnd{"0"};

TEST(MnaTest, ResistiveDivider) {
  Netlist net;
  net.add(VSource{"V1", NodeId{"in"}, kGnd, AcWave{1.0, 0.0}});
  net.add(Resistor{"R1", NodeId{"in"}, NodeId{"mid"}, 1e3});
  net.add(Resistor{"R2", NodeId{"mid"}, kGnd, 1e3});
  net.add_probe("MID", "mid");
  for (double w : {0.0, 1.0, 1e9}) {
    const Complex g = ac_gain(net, "MID", w);
    EXPECT_NEAR(g.real(), 0.5, 1e-15);
    EXPECT_NEAR(g.imag(), 0.0, 1e-15);
  }
}

Netlist low_pass() {
  Netlist net;
  net.add(VSource{"V1", NodeId{"in"}, kGnd, AcWave{1.0, 0.0}});
  net.add(Resistor{"R1", NodeId{"in"}, NodeId{"out"}, kR});
  net.add(Capacitor{"C1", NodeId{"out"}, kGnd, kC});
  net.add_probe("OUT", "out");
  return net;
}

TEST(MnaTest, RcLowPassAtCorner) {
  const Complex g = ac_gain(low_pass(), "OUT", 1.0 / (kR * kC));
  EXPECT_NEAR(std::abs(g), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(std::arg(g) * 180.0 / kPi, -45.0, 1e-12);
}

TEST(MnaTest, SystemDimension) {
  const auto sys = assemble_ac(build_fig2_netlist(kR, kC), 1.0);
  // 4 nodes + 1 source + 2 conveyor branches.
  EXPECT_EQ(sys.dim, 7u);
  EXPECT_EQ(sys.labels,
            (std::vector<std::string>{"V(IN)", "V(OUT1)", "V(A)", "V(OUT2)",
                                      "I(V1)", "I(X1.X+)", "I(X1.X-)"}));
}

TEST(MnaTest, Fig2InvertingOutputAtPole) {
  const Complex g = ac_gain(build_fig2_netlist(kR, kC), "VOUT1", 1e6);
  EXPECT_NEAR(g.real(), 0.0, 1e-15);
  EXPECT_NEAR(g.imag(), -1.0, 1e-15);
}

TEST(MnaTest, Fig2AtDc) {
  const Complex g = ac_gain(build_fig2_netlist(kR, kC), "VOUT2", 0.0);
  EXPECT_NEAR(g.real(), -1.0, 1e-15);
  EXPECT_NEAR(g.imag(), 0.0, 1e-15);
}

TEST(MnaTest, CapacitorOnlyNodeIsSingularAtDc) {
  Netlist net;
  net.add(VSource{"V1", NodeId{"in"}, kGnd, AcWave{}});
  net.add(Resistor{"R1", NodeId{"in"}, kGnd, 1e3});
  net.add(Capacitor{"C1", NodeId{"in"}, NodeId{"float"}, 1e-9});
  net.add(Capacitor{"C2", NodeId{"float"}, kGnd, 1e-9});
  net.add_probe("F", "float");
  EXPECT_NO_THROW(ac_gain(net, "F", 1e3));
  try {
    ac_gain(net, "F", 0.0);
    FAIL() << "expected SingularSystem";
  } catch (const SingularSystem& e) {
    EXPECT_EQ(e.unknown(), "V(float)");
  }
}

TEST(MnaTest, AcGainErrors) {
  Netlist net = build_fig2_netlist(kR, kC);
  EXPECT_THROW(ac_gain(net, "NOPE", 1.0), DomainError);

  Netlist silent = build_fig2_netlist(kR, kC, {}, {}, AcWave{0.0, 0.0});
  EXPECT_THROW(ac_gain(silent, "VOUT1", 1.0), DomainError);

  net.add(VSource{"V2", NodeId{"OUT2"}, NodeId{"X"}, AcWave{}});
  EXPECT_THROW(ac_gain(net, "VOUT1", 1.0), DomainError);
}

TEST(MnaTest, SourcePhaseIsDivided) {
  const Netlist net = build_fig2_netlist(kR, kC, {}, {}, AcWave{2.0, 37.0});
  const Complex g = ac_gain(net, "VOUT1", 1e6);
  EXPECT_NEAR(g.real(), 0.0, 1e-14);
  EXPECT_NEAR(g.imag(), -1.0, 1e-14);
}

TEST(MnaTest, IdealMatchesClosedFormsOnLogGrid) {
  const Netlist net = build_fig2_netlist(kR, kC);
  for (int k = 0; k < 50; ++k) {
    const double w = 2 * kPi * std::pow(10.0, 8.0 * k / 49.0);
    const Complex s{0.0, w};
    const Complex eq2 = -(s - 1e6) / (s + 1e6);
    const Complex eq3 = (s - 1e6) / (s + 1e6);
    EXPECT_LT(rel_err(ac_gain(net, "VOUT1", w), eq2), 1e-9) << w;
    EXPECT_LT(rel_err(ac_gain(net, "VOUT2", w), eq3), 1e-9) << w;
    EXPECT_NEAR(std::abs(ac_gain(net, "VOUT2", w)), 1.0, 1e-12);
  }
}

// The independent 3-unknown elimination must agree with both the published
// non-ideal OUT2 response and the full MNA solve.
TEST(MnaTest, NonIdealMatchesCramerAndClosedForm) {
  std::mt19937_64 rng(5);
  for (int draw = 0; draw < 300; ++draw) {
    const FdcciiParams p = testing::random_params(rng);
    const Netlist net = build_fig2_netlist(kR, kC, p);
    const double rc = kR * kC;
    for (double w : {1e2, 1e5, 1e6, 3e6, 1e8}) {
      const Complex s{0.0, w};
      const auto ref = section_by_cramer(s, kR, kC, p);
      const Complex eq6 =
          p.beta1 *
          (s + p.alpha2 * (p.beta1 * p.beta5 - p.beta2 - p.beta2 * p.beta4) /
                   (p.beta1 * rc)) /
          (s + p.beta5 * p.alpha2 / rc);
      EXPECT_LT(rel_err(ref.out2, eq6), 1e-12);
      EXPECT_LT(rel_err(ac_gain(net, "VOUT2", w), ref.out2), 1e-9);
      EXPECT_LT(rel_err(ac_gain(net, "VOUT1", w), ref.out1), 1e-9);
    }
  }
}

TEST(MnaTest, Alpha2OnlyNonIdeal) {
  FdcciiParams p;
  p.alpha2 = 0.9;
  const Netlist net = build_fig2_netlist(kR, kC, p);
  for (double w : {1e3, 1e5, 9e5, 1e7}) {
    const Complex s{0.0, w};
    // Eq. (6) with all beta = 1: (s + 0.9(1 - 1 - 1)/RC) / (s + 0.9/RC).
    const Complex want = (s - 0.9e6) / (s + 0.9e6);
    EXPECT_LT(rel_err(ac_gain(net, "VOUT2", w), want), 1e-12);
  }
}

TEST(MnaTest, ResidualBound) {
  std::mt19937_64 rng(17);
  for (int draw = 0; draw < 100; ++draw) {
    const auto net = build_fig2_netlist(kR, kC, testing::random_params(rng));
    for (double w : {0.0, 1e3, 1e6, 1e9}) {
      const auto sys = assemble_ac(net, w);
      LuFactorization<Complex> lu(sys.matrix);
      ASSERT_TRUE(lu.ok());
      EXPECT_LE(relative_residual(sys, lu.solve(sys.rhs)), 1e-12);
    }
  }
}

TEST(MnaTest, StampLocality) {
  const Netlist base = build_fig2_netlist(kR, kC);
  Netlist extra = base;
  extra.add(Resistor{"R99", NodeId{"OUT2"}, NodeId{"spur"}, 4.7e3});
  extra.add(Resistor{"R98", NodeId{"spur"}, kGnd, 10.0});
  for (double w : {1e3, 1e6, 1e8}) {
    for (auto probe : {"VOUT1", "VOUT2"}) {
      EXPECT_LT(rel_err(ac_gain(extra, probe, w), ac_gain(base, probe, w)),
                1e-12);
    }
  }
}

TEST(MnaTest, ScalingInvariance) {
  const Netlist base = build_fig2_netlist(kR, kC);
  for (double k : {1e-3, 0.37, 2.0, 1e4}) {
    const Netlist scaled = build_fig2_netlist(kR * k, kC / k);
    for (double w : {1e2, 1e6, 1e8}) {
      for (auto probe : {"VOUT1", "VOUT2"}) {
        EXPECT_LT(rel_err(ac_gain(scaled, probe, w), ac_gain(base, probe, w)),
                  1e-12);
      }
    }
  }
}

// Drive X+ from Y1 and load it and Z+ with resistors; with the into-device
// convention I_Z+ = alpha1 I_X+, so the Z+ node sits at alpha1 * V(X+) * Rz/Rx.
TEST(MnaTest, CurrentConveyorSigns) {
  FdcciiParams p;
  p.alpha1 = 0.8;
  p.alpha2 = 0.7;
  p.beta1 = 0.9;
  Netlist net;
  net.add(VSource{"V1", NodeId{"in"}, kGnd, AcWave{}});
  net.add(Fdccii{"X1", NodeId{"in"}, kGnd, kGnd, kGnd, NodeId{"xp"},
                 NodeId{"xm"}, NodeId{"zp"}, NodeId{"zm"}, p, {}});
  net.add(Resistor{"RXP", NodeId{"xp"}, kGnd, 1e3});
  net.add(Resistor{"RXM", NodeId{"xm"}, NodeId{"in"}, 1e3});
  net.add(Resistor{"RZP", NodeId{"zp"}, kGnd, 2e3});
  net.add(Resistor{"RZM", NodeId{"zm"}, kGnd, 2e3});
  net.add_probe("XP", "xp");
  net.add_probe("ZP", "zp");
  net.add_probe("ZM", "zm");
  net.add_probe("XM", "xm");

  const Complex vxp = ac_gain(net, "XP", 0.0);
  EXPECT_NEAR(vxp.real(), 0.9, 1e-15);
  // I_X+ into device = -V(xp)/1k (current through RXP flows node -> ground).
  const double ixp = -0.9 / 1e3;
  // I_Z+ = alpha1 I_X+ flows into the device, so RZP carries -I_Z+ upward.
  EXPECT_NEAR(ac_gain(net, "ZP", 0.0).real(), -p.alpha1 * ixp * 2e3, 1e-14);

  // V(xm) = -beta4 V(in) = -1; I_X- = (V(in) - V(xm)) / 1k = 2 mA into X-.
  EXPECT_NEAR(ac_gain(net, "XM", 0.0).real(), -1.0, 1e-15);
  const double ixm = 2e-3;
  // I_Z- = -alpha2 I_X- into the device: alpha2 I_X- leaves Z- into RZM.
  EXPECT_NEAR(ac_gain(net, "ZM", 0.0).real(), p.alpha2 * ixm * 2e3, 1e-14);
}

}  // namespace
}  // namespace fdsim
