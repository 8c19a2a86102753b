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

#ifndef FDSIM_NETLIST_HPP_
#define FDSIM_NETLIST_HPP_

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace fdsim {

inline constexpr std::string_view kGroundName = "0";
inline constexpr int kGroundIndex = -1;
// Index carried by a NodeId whose name is not in the netlist's node table.
inline constexpr int kUnknownIndex = -2;

struct NodeId {
  std::string name;
  int index = kUnknownIndex;

  bool is_ground() const { return name == kGroundName; }
  friend bool operator==(const NodeId&, const NodeId&) = default;
};

// Tracking gains of a fully differential second-generation current
// conveyor. The matrix signs are fixed by the device; these are magnitudes:
//
//   V(X+) =  beta1 V(Y1) - beta2 V(Y2) + beta3 V(Y3)
//   V(X-) = -beta4 V(Y1) + beta5 V(Y2) + beta6 V(Y4)
//   I(Z+) =  alpha1 I(X+),   I(Z-) = -alpha2 I(X-)
//
// with all terminal currents flowing into the device and I(Y1..Y4) = 0.
struct FdcciiParams {
  double alpha1 = 1.0;
  double alpha2 = 1.0;
  double beta1 = 1.0;
  double beta2 = 1.0;
  double beta3 = 1.0;
  double beta4 = 1.0;
  double beta5 = 1.0;
  double beta6 = 1.0;

  static FdcciiParams ideal() { return {}; }

  // All eight gains finite and strictly positive.
  bool admissible() const;

  friend bool operator==(const FdcciiParams&, const FdcciiParams&) = default;
};

// alpha_i = 1 - delta_i, beta_i = 1 - eps_i. Throws DomainError when any
// |delta| or |eps| >= 1.
FdcciiParams params_from_tracking_errors(double delta1, double delta2,
                                         double eps1, double eps2, double eps3,
                                         double eps4, double eps5,
                                         double eps6);

// Symmetric soft clip of the X-stage outputs: v = vsat * tanh(u / vsat).
struct SaturationSpec {
  double vsat = 3.0;
  friend bool operator==(const SaturationSpec&, const SaturationSpec&) =
      default;
};

// Small-signal phasor; the analysis supplies the frequency.
struct AcWave {
  double amplitude = 1.0;
  double phase_deg = 0.0;
  friend bool operator==(const AcWave&, const AcWave&) = default;
};

// offset + amplitude * sin(2 pi freq t + phase).
struct SinWave {
  double offset = 0.0;
  double amplitude = 1.0;
  double freq_hz = 1.0;
  double phase_deg = 0.0;
  friend bool operator==(const SinWave&, const SinWave&) = default;
};

using Waveform = std::variant<AcWave, SinWave>;

struct Resistor {
  std::string name;
  NodeId n1, n2;
  double ohms = 0.0;
  friend bool operator==(const Resistor&, const Resistor&) = default;
};

struct Capacitor {
  std::string name;
  NodeId n1, n2;
  double farads = 0.0;
  friend bool operator==(const Capacitor&, const Capacitor&) = default;
};

struct VSource {
  std::string name;
  NodeId np, nm;
  Waveform waveform;
  friend bool operator==(const VSource&, const VSource&) = default;
};

struct Fdccii {
  std::string name;
  NodeId y1, y2, y3, y4, xp, xm, zp, zm;
  FdcciiParams params;
  std::optional<SaturationSpec> saturation;
  friend bool operator==(const Fdccii&, const Fdccii&) = default;
};

using Element = std::variant<Resistor, Capacitor, VSource, Fdccii>;

std::string_view element_name(const Element& e);
std::vector<const NodeId*> terminals(const Element& e);

struct Probe {
  std::string label;
  NodeId node;
  friend bool operator==(const Probe&, const Probe&) = default;
};

// Ordered element list plus the node table and probe declarations. Nodes are
// indexed densely in order of first appearance among element terminals;
// ground ("0") is never in the table.
class Netlist {
 public:
  Netlist() = default;
  explicit Netlist(std::string title) : title_(std::move(title)) {}

  // Appends `e`, interning its terminal names and rewriting their indices.
  void add(Element e);
  // The node is resolved against the current table; unknown names keep
  // kUnknownIndex and are reported by validate().
  void add_probe(std::string label, std::string_view node);

  const std::string& title() const { return title_; }
  void set_title(std::string title) { title_ = std::move(title); }
  const std::vector<Element>& elements() const { return elements_; }
  std::vector<Element>& mutable_elements() { return elements_; }
  const std::vector<std::string>& nodes() const { return nodes_; }
  const std::vector<Probe>& probes() const { return probes_; }

  std::size_t node_count() const { return nodes_.size(); }
  // kGroundIndex for "0", kUnknownIndex if absent.
  int find_node(std::string_view name) const;
  const Probe* find_probe(std::string_view label) const;

  friend bool operator==(const Netlist&, const Netlist&) = default;

 private:
  NodeId intern(const NodeId& node);

  std::string title_;
  std::vector<Element> elements_;
  std::vector<std::string> nodes_;
  std::vector<Probe> probes_;
};

enum class ViolationKind {
  kNonPositiveValue,
  kBadGain,
  kBadWaveform,
  kMissingGround,
  kFloatingSubcircuit,
  kUnknownProbeNode,
  kDuplicateName,
};

struct Violation {
  ViolationKind kind;
  std::string message;
  // Offending element name, node name or probe label.
  std::string subject;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

ValidationReport validate(const Netlist& netlist);

// Element and probe names used by build_fig2_netlist().
inline constexpr std::string_view kProbeOut1 = "VOUT1";
inline constexpr std::string_view kProbeOut2 = "VOUT2";

// The single-FDCCII first-order all-pass section: V_IN drives Y1 and, through
// R, the X- terminal; C is grounded at node A, which is tied to Y2 and Z-;
// Y3, Y4 and Z+ are grounded. VOUT1 = X- (inverting), VOUT2 = X+.
//
// The default source is a 1 V peak sine at the designed pole 1/(2 pi R C).
// Throws DomainError unless r > 0, c > 0 and params are admissible.
Netlist build_fig2_netlist(double r, double c,
                           const FdcciiParams& params = FdcciiParams::ideal(),
                           std::optional<SaturationSpec> saturation = {},
                           std::optional<Waveform> source = {});

}  // namespace fdsim

#endif  // FDSIM_NETLIST_HPP_
