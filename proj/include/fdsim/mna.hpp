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

#ifndef FDSIM_MNA_HPP_
#define FDSIM_MNA_HPP_

#include <complex>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "fdsim/dense_lu.hpp"
#include "fdsim/netlist.hpp"

namespace fdsim {

using Complex = std::complex<double>;

// Unknown-vector layout: node voltages first (netlist node order), then the
// auxiliary branch currents in element order: one per voltage source, two
// per FDCCII (I_X+, I_X-), and, when requested, one per capacitor.
class MnaLayout {
 public:
  explicit MnaLayout(const Netlist& netlist,
                     bool capacitor_branches = false);

  std::size_t dim() const { return labels_.size(); }
  std::size_t node_count() const { return node_count_; }
  // First auxiliary row of element i, or -1 if it has none.
  int aux(std::size_t element) const { return aux_[element]; }
  // Row of a node, or -1 for ground.
  int row(const NodeId& node) const {
    return node.is_ground() ? -1 : node.index;
  }
  const std::vector<std::string>& labels() const { return labels_; }
  // -1 if absent.
  int index_of(std::string_view label) const;

 private:
  std::size_t node_count_ = 0;
  std::vector<int> aux_;
  std::vector<std::string> labels_;
};

struct ComplexSystem {
  std::size_t dim = 0;
  DenseMatrix<Complex> matrix;
  std::vector<Complex> rhs;
  std::vector<std::string> labels;  // row/column index -> unknown label
  std::size_t node_count = 0;

  int index_of(std::string_view label) const;
};

struct Solution {
  std::vector<Complex> voltages;         // per non-ground node
  std::vector<Complex> branch_currents;  // per auxiliary unknown
  std::vector<std::string> labels;

  // 0 for ground.
  Complex voltage(const NodeId& node) const {
    return node.is_ground() ? Complex{} : voltages.at(node.index);
  }
};

// Complex source phasor used for AC analysis. A SIN source contributes its
// amplitude and phase; the sine itself is the phase reference.
Complex source_phasor(const VSource& v);

// KCL rows are "sum of currents leaving the node = 0"; FDCCII terminal
// currents flow into the device.
ComplexSystem assemble_ac(const Netlist& netlist, double omega);

// Dense LU with scaled partial pivoting. Throws SingularSystem naming the
// row that could not be pivoted.
Solution solve(const ComplexSystem& system);

// ||A x - b||_inf / (||A||_inf ||x||_inf).
double relative_residual(const ComplexSystem& system,
                         const std::vector<Complex>& x);

// V(probe) / source phasor. Requires exactly one voltage source with
// non-zero amplitude and a probe named `probe_label`.
Complex ac_gain(const Netlist& netlist, std::string_view probe_label,
                double omega);

// Gains of several probes from a single solve.
std::vector<Complex> ac_gains(const Netlist& netlist,
                              const std::vector<std::string>& probe_labels,
                              double omega);

// FDCCII stamp shared by AC and transient assembly. With include_y_terms
// false only the X coefficient of the two constraint rows is stamped and the
// caller supplies the Y combination itself (the saturating transient model).
template <typename T>
void stamp_fdccii(const MnaLayout& layout, const Fdccii& x, int aux,
                  DenseMatrix<T>& a, bool include_y_terms = true) {
  const int xp = layout.row(x.xp);
  const int xm = layout.row(x.xm);
  const int zp = layout.row(x.zp);
  const int zm = layout.row(x.zm);
  const auto& g = x.params;
  const std::size_t ip = static_cast<std::size_t>(aux);
  const std::size_t im = ip + 1;

  // I_X+ and I_X- leave their nodes into the device.
  if (xp >= 0) a(xp, ip) += T{1};
  if (xm >= 0) a(xm, im) += T{1};
  // I_Z+ = alpha1 I_X+ into the device; I_Z- = -alpha2 I_X- into the device.
  if (zp >= 0) a(zp, ip) += T{g.alpha1};
  if (zm >= 0) a(zm, im) -= T{g.alpha2};

  // V(X+) - b1 V(Y1) + b2 V(Y2) - b3 V(Y3) = 0
  // V(X-) + b4 V(Y1) - b5 V(Y2) - b6 V(Y4) = 0
  if (xp >= 0) a(ip, xp) += T{1};
  if (xm >= 0) a(im, xm) += T{1};
  if (!include_y_terms) return;
  auto add = [&](std::size_t r, const NodeId& n, double coeff) {
    const int c = layout.row(n);
    if (c >= 0) a(r, c) += T{coeff};
  };
  add(ip, x.y1, -g.beta1);
  add(ip, x.y2, g.beta2);
  add(ip, x.y3, -g.beta3);
  add(im, x.y1, g.beta4);
  add(im, x.y2, -g.beta5);
  add(im, x.y4, -g.beta6);
}

template <typename T>
void stamp_conductance(const MnaLayout& layout, const NodeId& n1,
                       const NodeId& n2, T y, DenseMatrix<T>& a) {
  const int i = layout.row(n1);
  const int j = layout.row(n2);
  if (i >= 0) a(i, i) += y;
  if (j >= 0) a(j, j) += y;
  if (i >= 0 && j >= 0) {
    a(i, j) -= y;
    a(j, i) -= y;
  }
}

// Branch current `aux` flows from np through the source to nm; the
// constraint row is V(np) - V(nm) = value (value goes in the rhs).
template <typename T>
void stamp_branch(const MnaLayout& layout, const NodeId& np, const NodeId& nm,
                  int aux, DenseMatrix<T>& a) {
  const int i = layout.row(np);
  const int j = layout.row(nm);
  const std::size_t k = static_cast<std::size_t>(aux);
  if (i >= 0) {
    a(i, k) += T{1};
    a(k, i) += T{1};
  }
  if (j >= 0) {
    a(j, k) -= T{1};
    a(k, j) -= T{1};
  }
}

}  // namespace fdsim

#endif  // FDSIM_MNA_HPP_
