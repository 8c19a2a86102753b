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

#include "fdsim/netlist.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>

#include "fdsim/errors.hpp"

namespace fdsim {

bool FdcciiParams::admissible() const {
  for (double g : {alpha1, alpha2, beta1, beta2, beta3, beta4, beta5, beta6}) {
    if (!std::isfinite(g) || g <= 0.0) return false;
  }
  return true;
}

FdcciiParams params_from_tracking_errors(double delta1, double delta2,
                                         double eps1, double eps2, double eps3,
                                         double eps4, double eps5,
                                         double eps6) {
  for (double e : {delta1, delta2, eps1, eps2, eps3, eps4, eps5, eps6}) {
    if (!(std::abs(e) < 1.0)) {
      throw DomainError("tracking error magnitude must be < 1");
    }
  }
  FdcciiParams p;
  p.alpha1 = 1.0 - delta1;
  p.alpha2 = 1.0 - delta2;
  p.beta1 = 1.0 - eps1;
  p.beta2 = 1.0 - eps2;
  p.beta3 = 1.0 - eps3;
  p.beta4 = 1.0 - eps4;
  p.beta5 = 1.0 - eps5;
  p.beta6 = 1.0 - eps6;
  return p;
}

std::string_view element_name(const Element& e) {
  return std::visit([](const auto& el) -> std::string_view { return el.name; },
                    e);
}

namespace {

struct TerminalVisitor {
  std::vector<const NodeId*> operator()(const Resistor& r) const {
    return {&r.n1, &r.n2};
  }
  std::vector<const NodeId*> operator()(const Capacitor& c) const {
    return {&c.n1, &c.n2};
  }
  std::vector<const NodeId*> operator()(const VSource& v) const {
    return {&v.np, &v.nm};
  }
  std::vector<const NodeId*> operator()(const Fdccii& x) const {
    return {&x.y1, &x.y2, &x.y3, &x.y4, &x.xp, &x.xm, &x.zp, &x.zm};
  }
};

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char ch) { return std::tolower(ch); });
  return out;
}

}  // namespace

std::vector<const NodeId*> terminals(const Element& e) {
  return std::visit(TerminalVisitor{}, e);
}

int Netlist::find_node(std::string_view name) const {
  if (name == kGroundName) return kGroundIndex;
  auto it = std::find(nodes_.begin(), nodes_.end(), name);
  if (it == nodes_.end()) return kUnknownIndex;
  return static_cast<int>(it - nodes_.begin());
}

const Probe* Netlist::find_probe(std::string_view label) const {
  for (const auto& p : probes_) {
    if (p.label == label) return &p;
  }
  return nullptr;
}

NodeId Netlist::intern(const NodeId& node) {
  int index = find_node(node.name);
  if (index == kUnknownIndex) {
    nodes_.push_back(node.name);
    index = static_cast<int>(nodes_.size()) - 1;
  }
  return NodeId{node.name, index};
}

void Netlist::add(Element e) {
  std::visit(
      [this](auto& el) {
        using T = std::decay_t<decltype(el)>;
        if constexpr (std::is_same_v<T, Fdccii>) {
          for (NodeId* n : {&el.y1, &el.y2, &el.y3, &el.y4, &el.xp, &el.xm,
                            &el.zp, &el.zm}) {
            *n = intern(*n);
          }
        } else if constexpr (std::is_same_v<T, VSource>) {
          el.np = intern(el.np);
          el.nm = intern(el.nm);
        } else {
          el.n1 = intern(el.n1);
          el.n2 = intern(el.n2);
        }
      },
      e);
  elements_.push_back(std::move(e));
}

void Netlist::add_probe(std::string label, std::string_view node) {
  probes_.push_back(Probe{std::move(label),
                          NodeId{std::string(node), find_node(node)}});
}

namespace {

class DisjointSet {
 public:
  explicit DisjointSet(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent_[find(a)] = find(b); }

 private:
  std::vector<std::size_t> parent_;
};

void check_values(const Element& e, std::vector<Violation>& out) {
  const std::string name(element_name(e));
  std::visit(
      [&](const auto& el) {
        using T = std::decay_t<decltype(el)>;
        if constexpr (std::is_same_v<T, Resistor>) {
          if (!std::isfinite(el.ohms) || el.ohms <= 0.0) {
            out.push_back({ViolationKind::kNonPositiveValue,
                           name + ": non-positive value", name});
          }
        } else if constexpr (std::is_same_v<T, Capacitor>) {
          if (!std::isfinite(el.farads) || el.farads <= 0.0) {
            out.push_back({ViolationKind::kNonPositiveValue,
                           name + ": non-positive value", name});
          }
        } else if constexpr (std::is_same_v<T, VSource>) {
          bool bad = false;
          if (const auto* ac = std::get_if<AcWave>(&el.waveform)) {
            bad = !std::isfinite(ac->amplitude) || ac->amplitude < 0.0 ||
                  !std::isfinite(ac->phase_deg);
          } else {
            const auto& s = std::get<SinWave>(el.waveform);
            bad = !std::isfinite(s.amplitude) || s.amplitude < 0.0 ||
                  !std::isfinite(s.freq_hz) || s.freq_hz <= 0.0 ||
                  !std::isfinite(s.offset) || !std::isfinite(s.phase_deg);
          }
          if (bad) {
            out.push_back(
                {ViolationKind::kBadWaveform, name + ": bad waveform", name});
          }
        } else {
          if (!el.params.admissible()) {
            out.push_back({ViolationKind::kBadGain,
                           name + ": gains must be finite and positive", name});
          }
          if (el.saturation && !(el.saturation->vsat > 0.0 &&
                                 std::isfinite(el.saturation->vsat))) {
            out.push_back(
                {ViolationKind::kNonPositiveValue,
                 name + ": non-positive value (saturation voltage)", name});
          }
        }
      },
      e);
}

}  // namespace

ValidationReport validate(const Netlist& netlist) {
  ValidationReport report;
  auto& out = report.violations;

  std::set<std::string> seen;
  for (const auto& e : netlist.elements()) {
    check_values(e, out);
    const std::string key = lower(element_name(e));
    if (!seen.insert(key).second) {
      out.push_back({ViolationKind::kDuplicateName,
                     std::string(element_name(e)) + ": duplicate name",
                     std::string(element_name(e))});
    }
  }

  // Union-find over nodes; slot n is ground. Every element ties all of its
  // terminals together.
  const std::size_t n = netlist.node_count();
  DisjointSet sets(n + 1);
  bool touches_ground = false;
  auto slot = [&](const NodeId& id) -> std::size_t {
    if (id.is_ground()) return n;
    const int idx = netlist.find_node(id.name);
    return idx >= 0 ? static_cast<std::size_t>(idx) : n;
  };
  for (const auto& e : netlist.elements()) {
    const auto ts = terminals(e);
    for (const NodeId* t : ts) {
      if (t->is_ground()) touches_ground = true;
      sets.unite(slot(*ts.front()), slot(*t));
    }
  }
  if (!touches_ground) {
    out.push_back({ViolationKind::kMissingGround,
                   "missing ground: no element touches node 0", "0"});
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      if (sets.find(i) != sets.find(n)) {
        const auto& name = netlist.nodes()[i];
        out.push_back({ViolationKind::kFloatingSubcircuit,
                       "node " + name + ": floating subcircuit", name});
      }
    }
  }

  for (const auto& p : netlist.probes()) {
    if (p.node.is_ground()) continue;
    if (netlist.find_node(p.node.name) == kUnknownIndex) {
      out.push_back({ViolationKind::kUnknownProbeNode,
                     "probe " + p.label + ": unknown node " + p.node.name,
                     p.label});
    }
  }
  return report;
}

Netlist build_fig2_netlist(double r, double c, const FdcciiParams& params,
                           std::optional<SaturationSpec> saturation,
                           std::optional<Waveform> source) {
  if (!(r > 0.0) || !std::isfinite(r)) {
    throw DomainError("resistance must be positive");
  }
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw DomainError("capacitance must be positive");
  }
  if (!params.admissible()) {
    throw DomainError("FDCCII gains must be finite and positive");
  }
  if (saturation && !(saturation->vsat > 0.0)) {
    throw DomainError("saturation voltage must be positive");
  }
  const Waveform wave = source.value_or(
      SinWave{0.0, 1.0, 1.0 / (2.0 * std::numbers::pi * r * c), 0.0});

  const NodeId gnd{std::string(kGroundName)};
  Netlist net("FDCCII first-order all-pass section");
  net.add(VSource{"V1", NodeId{"IN"}, gnd, wave});
  net.add(Resistor{"R1", NodeId{"IN"}, NodeId{"OUT1"}, r});
  net.add(Capacitor{"C1", NodeId{"A"}, gnd, c});
  net.add(Fdccii{"X1", NodeId{"IN"}, NodeId{"A"}, gnd, gnd, NodeId{"OUT2"},
                 NodeId{"OUT1"}, gnd, NodeId{"A"}, params, saturation});
  net.add_probe(std::string(kProbeOut1), "OUT1");
  net.add_probe(std::string(kProbeOut2), "OUT2");
  return net;
}

}  // namespace fdsim
