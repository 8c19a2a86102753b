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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

#include "fdsim/dense_lu.hpp"
#include "fdsim/errors.hpp"
#include "fdsim/mna.hpp"

namespace fdsim {

namespace {

constexpr double kPi = std::numbers::pi;

// One clipped X output: row `row` reads V(X) - vsat tanh(u / vsat) = 0 with
// u = sum coeff * V(col).
struct ClippedRow {
  std::size_t row;
  double vsat;
  std::vector<std::pair<std::size_t, double>> terms;

  double u(const std::vector<double>& x) const {
    double acc = 0.0;
    for (const auto& [col, coeff] : terms) acc += coeff * x[col];
    return acc;
  }
};

double source_value(const VSource& v, double t) {
  if (const auto* s = std::get_if<SinWave>(&v.waveform)) {
    return s->offset +
           s->amplitude *
               std::sin(2.0 * kPi * s->freq_hz * t + s->phase_deg * kPi / 180.0);
  }
  return 0.0;
}

struct StepSystem {
  MnaLayout layout;
  DenseMatrix<double> a;
  std::vector<ClippedRow> clipped;
};

// Real-valued MNA matrix for a time step. With `initial` set, capacitors are
// 0 V branches (the t = 0 operating point); otherwise they are trapezoidal
// companion conductances 2C/h.
StepSystem build_step_system(const Netlist& netlist, double h, bool initial) {
  StepSystem s{MnaLayout(netlist, initial), {}, {}};
  s.a = DenseMatrix<double>(s.layout.dim());
  const auto& elements = netlist.elements();
  for (std::size_t i = 0; i < elements.size(); ++i) {
    const int aux = s.layout.aux(i);
    std::visit(
        [&](const auto& el) {
          using T = std::decay_t<decltype(el)>;
          if constexpr (std::is_same_v<T, Resistor>) {
            stamp_conductance(s.layout, el.n1, el.n2, 1.0 / el.ohms, s.a);
          } else if constexpr (std::is_same_v<T, Capacitor>) {
            if (initial) {
              stamp_branch(s.layout, el.n1, el.n2, aux, s.a);
            } else {
              stamp_conductance(s.layout, el.n1, el.n2, 2.0 * el.farads / h,
                                s.a);
            }
          } else if constexpr (std::is_same_v<T, VSource>) {
            stamp_branch(s.layout, el.np, el.nm, aux, s.a);
          } else {
            const bool clip = el.saturation.has_value();
            stamp_fdccii(s.layout, el, aux, s.a, !clip);
            if (!clip) return;
            const auto& g = el.params;
            const double vsat = el.saturation->vsat;
            auto row = [&](std::size_t r,
                           std::initializer_list<std::pair<NodeId, double>> in) {
              ClippedRow c{r, vsat, {}};
              for (const auto& [node, coeff] : in) {
                const int col = s.layout.row(node);
                if (col >= 0) c.terms.emplace_back(col, coeff);
              }
              s.clipped.push_back(std::move(c));
            };
            const auto ip = static_cast<std::size_t>(aux);
            row(ip, {{el.y1, g.beta1}, {el.y2, -g.beta2}, {el.y3, g.beta3}});
            row(ip + 1,
                {{el.y1, -g.beta4}, {el.y2, g.beta5}, {el.y4, g.beta6}});
          }
        },
        elements[i]);
  }
  return s;
}

[[noreturn]] void throw_singular(const MnaLayout& layout, std::size_t row,
                                 double t) {
  const std::string& label = layout.labels().at(row);
  throw SingularSystem(label, "singular transient system at unknown " + label +
                                  " (t = " + std::to_string(t) + " s)");
}

std::vector<double> residual(const StepSystem& s, const std::vector<double>& x,
                             const std::vector<double>& b) {
  auto f = s.a.multiply(x);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] -= b[i];
  for (const auto& c : s.clipped) {
    f[c.row] -= c.vsat * std::tanh(c.u(x) / c.vsat);
  }
  return f;
}

// Damped Newton on A x + g(x) = b, starting from x.
void newton(const StepSystem& s, const std::vector<double>& b,
            std::vector<double>& x, double t, const TransientOptions& opt) {
  auto f = residual(s, x, b);
  double fnorm = norm_inf<double>(f);
  for (int iter = 1; iter <= opt.max_iterations; ++iter) {
    DenseMatrix<double> j = s.a;
    for (const auto& c : s.clipped) {
      const double th = std::tanh(c.u(x) / c.vsat);
      const double slope = 1.0 - th * th;
      for (const auto& [col, coeff] : c.terms) j(c.row, col) -= slope * coeff;
    }
    LuFactorization<double> lu(std::move(j));
    if (!lu.ok()) throw_singular(s.layout, *lu.singular_row(), t);
    for (double& v : f) v = -v;
    const auto dx = lu.solve(f);

    double lambda = 1.0;
    std::vector<double> trial(x.size());
    std::vector<double> ftrial;
    double trial_norm = 0.0;
    for (int k = 0; k <= opt.max_halvings; ++k) {
      for (std::size_t i = 0; i < x.size(); ++i) trial[i] = x[i] + lambda * dx[i];
      ftrial = residual(s, trial, b);
      trial_norm = norm_inf<double>(ftrial);
      if (trial_norm < fnorm || k == opt.max_halvings) break;
      lambda *= 0.5;
    }
    const double step = lambda * norm_inf<double>(dx);
    x.swap(trial);
    f.swap(ftrial);
    fnorm = trial_norm;
    if (step <= opt.newton_tol * std::max(1.0, norm_inf<double>(x)) ||
        fnorm == 0.0) {
      return;
    }
  }
  throw NonConvergence(t, opt.max_iterations,
                       "Newton did not converge at t = " + std::to_string(t) +
                           " s");
}

std::vector<double> solve_linear_or_newton(const StepSystem& s,
                                           const std::vector<double>& b,
                                           std::vector<double> guess, double t,
                                           const TransientOptions& opt) {
  if (s.clipped.empty()) {
    LuFactorization<double> lu(s.a);
    if (!lu.ok()) throw_singular(s.layout, *lu.singular_row(), t);
    return lu.solve(b);
  }
  newton(s, b, guess, t, opt);
  return guess;
}

}  // namespace

const std::vector<double>& TransientResult::trace(
    std::string_view probe) const {
  for (std::size_t i = 0; i < probes.size(); ++i) {
    if (probes[i] == probe) return traces[i];
  }
  throw DomainError("no trace for probe " + std::string(probe));
}

TransientResult simulate(const Netlist& netlist, double h, double tstop,
                         const TransientOptions& options) {
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw DomainError("time step must be positive");
  }
  if (!(tstop >= 10.0 * h) || !std::isfinite(tstop)) {
    throw DomainError("tstop must be at least 10 time steps");
  }
  const bool has_sin = std::any_of(
      netlist.elements().begin(), netlist.elements().end(), [](const auto& e) {
        const auto* v = std::get_if<VSource>(&e);
        return v && std::holds_alternative<SinWave>(v->waveform);
      });
  if (!has_sin) throw DomainError("transient analysis needs a SIN source");

  std::vector<int> probe_rows;
  TransientResult result;
  result.step = h;
  for (const auto& p : netlist.probes()) {
    const int idx = netlist.find_node(p.node.name);
    if (idx == kUnknownIndex) {
      throw DomainError("probe " + p.label + " references an unknown node");
    }
    probe_rows.push_back(idx);
    result.probes.push_back(p.label);
  }

  const double ratio = tstop / h;
  const auto steps = static_cast<std::size_t>(
      std::abs(ratio - std::round(ratio)) < 1e-9 * ratio ? std::round(ratio)
                                                         : std::floor(ratio));

  const auto& elements = netlist.elements();
  struct CapState {
    std::size_t element;
    int n1, n2;
    double g;
    double v = 0.0;
    double i = 0.0;
  };
  std::vector<CapState> caps;
  for (std::size_t k = 0; k < elements.size(); ++k) {
    if (const auto* c = std::get_if<Capacitor>(&elements[k])) {
      caps.push_back({k, c->n1.is_ground() ? -1 : c->n1.index,
                      c->n2.is_ground() ? -1 : c->n2.index,
                      2.0 * c->farads / h});
    }
  }
  auto node_v = [](const std::vector<double>& x, int row) {
    return row < 0 ? 0.0 : x[row];
  };

  result.times.reserve(steps + 1);
  result.traces.assign(probe_rows.size(), {});
  for (auto& tr : result.traces) tr.reserve(steps + 1);
  auto record = [&](double t, const std::vector<double>& x) {
    result.times.push_back(t);
    for (std::size_t p = 0; p < probe_rows.size(); ++p) {
      result.traces[p].push_back(node_v(x, probe_rows[p]));
    }
  };

  // t = 0: capacitors held at their initial 0 V.
  const StepSystem init = build_step_system(netlist, h, true);
  std::vector<double> b0(init.layout.dim(), 0.0);
  for (std::size_t k = 0; k < elements.size(); ++k) {
    if (const auto* v = std::get_if<VSource>(&elements[k])) {
      b0[init.layout.aux(k)] = source_value(*v, 0.0);
    }
  }
  const auto x0 = solve_linear_or_newton(
      init, b0, std::vector<double>(init.layout.dim(), 0.0), 0.0, options);
  for (auto& c : caps) c.i = x0[init.layout.aux(c.element)];

  const StepSystem sys = build_step_system(netlist, h, false);
  std::vector<double> x(sys.layout.dim(), 0.0);
  for (std::size_t r = 0; r < x.size(); ++r) {
    x[r] = x0[init.layout.index_of(sys.layout.labels()[r])];
  }
  record(0.0, x);

  std::optional<LuFactorization<double>> lu;
  if (sys.clipped.empty()) {
    lu.emplace(sys.a);
    if (!lu->ok()) throw_singular(sys.layout, *lu->singular_row(), h);
  }

  std::vector<double> b(sys.layout.dim());
  for (std::size_t n = 1; n <= steps; ++n) {
    const double t = static_cast<double>(n) * h;
    std::fill(b.begin(), b.end(), 0.0);
    for (std::size_t k = 0; k < elements.size(); ++k) {
      if (const auto* v = std::get_if<VSource>(&elements[k])) {
        b[sys.layout.aux(k)] = source_value(*v, t);
      }
    }
    for (const auto& c : caps) {
      const double ieq = c.g * c.v + c.i;
      if (c.n1 >= 0) b[c.n1] += ieq;
      if (c.n2 >= 0) b[c.n2] -= ieq;
    }
    if (lu) {
      x = lu->solve(b);
    } else {
      newton(sys, b, x, t, options);
    }
    for (auto& c : caps) {
      const double ieq = c.g * c.v + c.i;
      c.v = node_v(x, c.n1) - node_v(x, c.n2);
      c.i = c.g * c.v - ieq;
    }
    record(t, x);
  }
  return result;
}

namespace {

struct Window {
  std::size_t start;
  std::size_t count;
};

Window window_for(const TransientResult& result, double freq_hz,
                  int settle_cycles, int window_cycles) {
  if (!(freq_hz > 0.0)) throw DomainError("frequency must be positive");
  if (settle_cycles < 0 || window_cycles < 1) {
    throw DomainError("need settle_cycles >= 0 and window_cycles >= 1");
  }
  const double per_period = 1.0 / (freq_hz * result.step);
  const double n_exact = window_cycles * per_period;
  const double n_round = std::round(n_exact);
  if (std::abs(n_exact - n_round) > 1e-6 * n_exact || n_round < 1.0) {
    throw DomainError("window does not span an integer number of periods");
  }
  const auto start =
      static_cast<std::size_t>(std::llround(settle_cycles * per_period));
  const auto count = static_cast<std::size_t>(n_round);
  if (start + count > result.times.size()) {
    throw DomainError("window exceeds the simulated samples");
  }
  return {start, count};
}

// Returns (in-phase with sin, in-phase with cos) amplitudes.
std::pair<double, double> project(const std::vector<double>& trace,
                                  const std::vector<double>& times, Window w,
                                  double freq_hz) {
  double s = 0.0;
  double c = 0.0;
  for (std::size_t i = w.start; i < w.start + w.count; ++i) {
    const double theta = 2.0 * kPi * freq_hz * times[i];
    s += trace[i] * std::sin(theta);
    c += trace[i] * std::cos(theta);
  }
  const double scale = 2.0 / static_cast<double>(w.count);
  return {s * scale, c * scale};
}

}  // namespace

PhasorMeasurement measure_phasor(const TransientResult& result,
                                 std::string_view probe, double freq_hz,
                                 int settle_cycles, int window_cycles) {
  const auto& trace = result.trace(probe);
  const Window w = window_for(result, freq_hz, settle_cycles, window_cycles);
  const auto [in_phase, quadrature] = project(trace, result.times, w, freq_hz);
  PhasorMeasurement m;
  m.freq_hz = freq_hz;
  m.amplitude = std::hypot(in_phase, quadrature);
  m.phase_deg = std::atan2(quadrature, in_phase) * 180.0 / kPi;
  if (m.phase_deg <= -180.0) m.phase_deg += 360.0;
  return m;
}

double thd(const TransientResult& result, std::string_view probe,
           double fundamental_hz, int n_harmonics, int settle_cycles,
           int window_cycles) {
  if (n_harmonics < 1) throw DomainError("need at least one harmonic");
  const double nyquist = 0.5 / result.step;
  if (!((n_harmonics + 1) * fundamental_hz < nyquist)) {
    throw DomainError("highest harmonic is above the Nyquist rate");
  }
  const auto& trace = result.trace(probe);
  const Window w =
      window_for(result, fundamental_hz, settle_cycles, window_cycles);
  auto amp = [&](int k) {
    const auto [a, b] = project(trace, result.times, w, k * fundamental_hz);
    return std::hypot(a, b);
  };
  const double a1 = amp(1);
  if (a1 < 1e-12) throw NoFundamental("fundamental amplitude below 1e-12 V");
  double sum = 0.0;
  for (int k = 2; k <= n_harmonics + 1; ++k) {
    const double ak = amp(k);
    sum += ak * ak;
  }
  return 100.0 * std::sqrt(sum) / a1;
}

std::vector<ThdRow> thd_sweep(const Netlist& netlist,
                              const std::vector<double>& amplitudes,
                              double freq_hz, const ThdOptions& options) {
  if (!(freq_hz > 0.0)) throw DomainError("frequency must be positive");
  for (std::size_t i = 0; i < amplitudes.size(); ++i) {
    if (!(amplitudes[i] > 0.0) ||
        (i > 0 && !(amplitudes[i] > amplitudes[i - 1]))) {
      throw DomainError("amplitudes must be positive and ascending");
    }
  }
  std::size_t source_count = 0;
  for (const auto& e : netlist.elements()) {
    source_count += std::holds_alternative<VSource>(e);
  }
  if (source_count != 1) {
    throw DomainError("THD sweep needs exactly one voltage source");
  }

  const double period = 1.0 / freq_hz;
  const double h = period / options.steps_per_period;
  const double tstop =
      (options.settle_cycles + options.window_cycles) * period;

  std::vector<ThdRow> rows;
  for (double amp : amplitudes) {
    Netlist driven = netlist;
    for (auto& e : driven.mutable_elements()) {
      if (auto* v = std::get_if<VSource>(&e)) {
        SinWave s{0.0, amp, freq_hz, 0.0};
        if (const auto* old = std::get_if<SinWave>(&v->waveform)) {
          s.offset = old->offset;
          s.phase_deg = old->phase_deg;
        }
        v->waveform = s;
      }
    }
    const auto result = simulate(driven, h, tstop);
    ThdRow row{amp, {}};
    for (const auto& p : result.probes) {
      row.thd_percent.push_back(thd(result, p, freq_hz, options.n_harmonics,
                                    options.settle_cycles,
                                    options.window_cycles));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace fdsim
