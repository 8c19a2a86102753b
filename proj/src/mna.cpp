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

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fdsim/errors.hpp"

namespace fdsim {

MnaLayout::MnaLayout(const Netlist& netlist, bool capacitor_branches)
    : node_count_(netlist.node_count()) {
  for (const auto& n : netlist.nodes()) labels_.push_back("V(" + n + ")");
  aux_.assign(netlist.elements().size(), -1);
  for (std::size_t i = 0; i < netlist.elements().size(); ++i) {
    const auto& e = netlist.elements()[i];
    const std::string name(element_name(e));
    if (std::holds_alternative<VSource>(e) ||
        (capacitor_branches && std::holds_alternative<Capacitor>(e))) {
      aux_[i] = static_cast<int>(labels_.size());
      labels_.push_back("I(" + name + ")");
    } else if (std::holds_alternative<Fdccii>(e)) {
      aux_[i] = static_cast<int>(labels_.size());
      labels_.push_back("I(" + name + ".X+)");
      labels_.push_back("I(" + name + ".X-)");
    }
  }
}

int MnaLayout::index_of(std::string_view label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  return it == labels_.end() ? -1 : static_cast<int>(it - labels_.begin());
}

int ComplexSystem::index_of(std::string_view label) const {
  auto it = std::find(labels.begin(), labels.end(), label);
  return it == labels.end() ? -1 : static_cast<int>(it - labels.begin());
}

Complex source_phasor(const VSource& v) {
  double amp = 0.0;
  double phase = 0.0;
  if (const auto* ac = std::get_if<AcWave>(&v.waveform)) {
    amp = ac->amplitude;
    phase = ac->phase_deg;
  } else {
    const auto& s = std::get<SinWave>(v.waveform);
    amp = s.amplitude;
    phase = s.phase_deg;
  }
  return std::polar(amp, phase * std::numbers::pi / 180.0);
}

ComplexSystem assemble_ac(const Netlist& netlist, double omega) {
  const MnaLayout layout(netlist);
  ComplexSystem sys;
  sys.dim = layout.dim();
  sys.matrix = DenseMatrix<Complex>(sys.dim);
  sys.rhs.assign(sys.dim, Complex{});
  sys.labels = layout.labels();
  sys.node_count = layout.node_count();

  const auto& elements = netlist.elements();
  for (std::size_t i = 0; i < elements.size(); ++i) {
    const int aux = layout.aux(i);
    std::visit(
        [&](const auto& el) {
          using T = std::decay_t<decltype(el)>;
          if constexpr (std::is_same_v<T, Resistor>) {
            stamp_conductance(layout, el.n1, el.n2, Complex{1.0 / el.ohms},
                              sys.matrix);
          } else if constexpr (std::is_same_v<T, Capacitor>) {
            stamp_conductance(layout, el.n1, el.n2,
                              Complex{0.0, omega * el.farads}, sys.matrix);
          } else if constexpr (std::is_same_v<T, VSource>) {
            stamp_branch(layout, el.np, el.nm, aux, sys.matrix);
            sys.rhs[aux] = source_phasor(el);
          } else {
            stamp_fdccii(layout, el, aux, sys.matrix);
          }
        },
        elements[i]);
  }
  return sys;
}

Solution solve(const ComplexSystem& system) {
  LuFactorization<Complex> lu(system.matrix);
  if (!lu.ok()) {
    const std::string& label = system.labels.at(*lu.singular_row());
    throw SingularSystem(label, "singular MNA system at unknown " + label);
  }
  auto x = lu.solve(system.rhs);
  Solution sol;
  sol.labels = system.labels;
  sol.voltages.assign(x.begin(), x.begin() + system.node_count);
  sol.branch_currents.assign(x.begin() + system.node_count, x.end());
  return sol;
}

double relative_residual(const ComplexSystem& system,
                         const std::vector<Complex>& x) {
  auto ax = system.matrix.multiply(x);
  for (std::size_t i = 0; i < ax.size(); ++i) ax[i] -= system.rhs[i];
  const double denom = system.matrix.norm_inf() *
                       norm_inf<Complex>(std::span<const Complex>(x));
  const double r = norm_inf<Complex>(std::span<const Complex>(ax));
  return denom == 0.0 ? r : r / denom;
}

namespace {

const VSource& only_source(const Netlist& netlist) {
  const VSource* found = nullptr;
  for (const auto& e : netlist.elements()) {
    if (const auto* v = std::get_if<VSource>(&e)) {
      if (found) {
        throw DomainError("AC gain needs exactly one voltage source");
      }
      found = v;
    }
  }
  if (!found) throw DomainError("AC gain needs exactly one voltage source");
  return *found;
}

}  // namespace

std::vector<Complex> ac_gains(const Netlist& netlist,
                              const std::vector<std::string>& probe_labels,
                              double omega) {
  const VSource& src = only_source(netlist);
  const Complex drive = source_phasor(src);
  if (std::abs(drive) == 0.0) {
    throw DomainError("source " + src.name + " has zero amplitude");
  }
  std::vector<const Probe*> probes;
  for (const auto& label : probe_labels) {
    const Probe* p = netlist.find_probe(label);
    if (!p) throw DomainError("no probe named " + label);
    if (!p->node.is_ground() && netlist.find_node(p->node.name) < 0) {
      throw DomainError("probe " + label + " references an unknown node");
    }
    probes.push_back(p);
  }
  const Solution sol = solve(assemble_ac(netlist, omega));
  std::vector<Complex> out;
  out.reserve(probes.size());
  for (const Probe* p : probes) {
    NodeId node{p->node.name, netlist.find_node(p->node.name)};
    out.push_back(sol.voltage(node) / drive);
  }
  return out;
}

Complex ac_gain(const Netlist& netlist, std::string_view probe_label,
                double omega) {
  return ac_gains(netlist, {std::string(probe_label)}, omega).front();
}

}  // namespace fdsim
