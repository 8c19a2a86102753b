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

#include "fdsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fdsim/errors.hpp"

namespace fdsim {

namespace {

constexpr double kPi = std::numbers::pi;

void require_rc(double r, double c) {
  if (!(r > 0.0) || !std::isfinite(r)) {
    throw DomainError("resistance must be positive");
  }
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw DomainError("capacitance must be positive");
  }
}

double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

// Wraps to (-180, 180].
double wrap_deg(double d) {
  d = std::fmod(d, 360.0);
  if (d <= -180.0) d += 360.0;
  if (d > 180.0) d -= 360.0;
  return d;
}

// Wraps to (-pi, pi].
double wrap_rad(double d) {
  d = std::fmod(d, 2.0 * kPi);
  if (d <= -kPi) d += 2.0 * kPi;
  if (d > kPi) d -= 2.0 * kPi;
  return d;
}

double phase_deg(Complex h) { return rad_to_deg(std::arg(h)); }

double gain_phase_at(const Netlist& netlist, std::string_view probe,
                     double freq_hz) {
  return phase_deg(ac_gain(netlist, probe, 2.0 * kPi * freq_hz));
}

}  // namespace

FirstOrderTF oracle_ideal(double r, double c, Output output) {
  require_rc(r, c);
  const double w = 1.0 / (r * c);
  return FirstOrderTF{output == Output::kOut1 ? -1.0 : 1.0, w, -w};
}

FirstOrderTF oracle_nonideal(double r, double c, const FdcciiParams& p,
                             Output output, Out1Form form) {
  require_rc(r, c);
  if (!p.admissible()) throw DomainError("FDCCII gains must be positive");
  const double rc = r * c;
  const double pole = -p.beta5 * p.alpha2 / rc;
  if (output == Output::kOut2) {
    const double zero = -p.alpha2 *
                        (p.beta1 * p.beta5 - p.beta2 - p.beta2 * p.beta4) /
                        (p.beta1 * rc);
    return FirstOrderTF{p.beta1, zero, pole};
  }
  const double zero = form == Out1Form::kBeta4FreeZero
                          ? p.beta5 * p.alpha2 / rc
                          : p.beta5 * p.alpha2 / (p.beta4 * rc);
  return FirstOrderTF{-p.beta4, zero, pole};
}

double pole_frequency_closed_form(double r, double c, const FdcciiParams& p) {
  require_rc(r, c);
  if (!p.admissible()) throw DomainError("FDCCII gains must be positive");
  return p.beta5 * p.alpha2 / (r * c);
}

std::vector<double> log_frequencies(const SweepGrid& grid) {
  if (!(grid.fstart_hz > 0.0) || !std::isfinite(grid.fstart_hz) ||
      !std::isfinite(grid.fstop_hz) || grid.fstop_hz < grid.fstart_hz) {
    throw DomainError("sweep needs 0 < fstart <= fstop");
  }
  if (grid.points_per_decade < 1) {
    throw DomainError("points per decade must be >= 1");
  }
  const double ppd = grid.points_per_decade;
  const double decades = std::log10(grid.fstop_hz / grid.fstart_hz);
  const auto count =
      static_cast<std::size_t>(std::floor(decades * ppd + 1e-6)) + 1;
  std::vector<double> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    double f = grid.fstart_hz * std::pow(10.0, static_cast<double>(k) / ppd);
    if (std::abs(f / grid.fstop_hz - 1.0) < 1e-9) f = grid.fstop_hz;
    out.push_back(f);
  }
  return out;
}

SweepTable ac_sweep(const Netlist& netlist,
                    const std::vector<std::string>& probes,
                    const SweepGrid& grid) {
  SweepTable table;
  table.grid = grid;
  table.probes = probes;
  for (double f : log_frequencies(grid)) {
    try {
      table.rows.push_back({f, ac_gains(netlist, probes, 2.0 * kPi * f)});
    } catch (const SingularSystem& e) {
      throw SingularSystem(e.unknown(), std::string(e.what()) + " at " +
                                            std::to_string(f) + " Hz");
    }
  }
  return table;
}

std::vector<double> unwrapped_phase_deg(const std::vector<Complex>& gains) {
  std::vector<double> out;
  out.reserve(gains.size());
  for (const Complex& h : gains) {
    const double p = phase_deg(h);
    out.push_back(out.empty() ? p : out.back() + wrap_deg(p - out.back()));
  }
  return out;
}

double estimate_pole_from_phase(const Netlist& netlist, std::string_view probe,
                                const PoleSearchOptions& options) {
  std::vector<double> freqs;
  for (double f = options.scan_fmin_hz; f <= options.scan_fmax_hz * (1 + 1e-12);
       f *= 10.0) {
    freqs.push_back(f);
  }
  if (freqs.size() < 2) throw DomainError("pole scan range too narrow");

  std::vector<double> phases;
  for (double f : freqs) {
    const double p = gain_phase_at(netlist, probe, f);
    phases.push_back(phases.empty() ? p
                                    : phases.back() + wrap_deg(p - phases.back()));
  }
  // Responses starting near 180 deg (the DC limit -1) aim for +90 deg.
  double target = -90.0;
  if (std::abs(phases.front()) > 90.0) {
    target = 90.0;
    if (phases.front() < 0.0) {
      for (double& p : phases) p += 360.0;
    }
  }
  const bool start_above = phases.front() > target;

  std::size_t hit = 0;
  for (std::size_t k = 1; k < freqs.size(); ++k) {
    if ((phases[k] > target) != start_above || phases[k] == target) {
      hit = k;
      break;
    }
  }
  if (hit == 0) {
    throw NotAllPassLike("probe " + std::string(probe) +
                         ": phase never crosses " + std::to_string(target) +
                         " deg in the scan range");
  }
  if (phases[hit] == target) return freqs[hit];

  double lo = freqs[hit - 1];
  double hi = freqs[hit];
  double phase_lo = phases[hit - 1];
  for (int iter = 0; iter < 400; ++iter) {
    const double mid = std::sqrt(lo * hi);
    if ((hi - lo) / mid < options.rel_tol) break;
    const double raw = gain_phase_at(netlist, probe, mid);
    const double p = phase_lo + wrap_deg(raw - phase_lo);
    if ((p > target) == start_above) {
      lo = mid;
      phase_lo = p;
    } else {
      hi = mid;
    }
  }
  return std::sqrt(lo * hi);
}

FirstOrderTF fit_first_order(const Netlist& netlist, std::string_view probe,
                             std::optional<double> f_ref_hz) {
  const double f_ref =
      f_ref_hz ? *f_ref_hz : estimate_pole_from_phase(netlist, probe);
  if (!(f_ref > 0.0)) throw DomainError("reference frequency must be positive");
  const double w_ref = 2.0 * kPi * f_ref;

  // In normalized sigma = s / w_ref:  H p' + sigma k - m' = H sigma, with
  // p' = p / w_ref and m' = k z / w_ref.
  DenseMatrix<Complex> a(3);
  std::vector<Complex> b(3);
  const double scales[] = {0.5, 1.0, 2.0};
  for (std::size_t i = 0; i < 3; ++i) {
    const Complex sigma{0.0, scales[i]};
    const Complex h = ac_gain(netlist, probe, w_ref * scales[i]);
    a(i, 0) = h;
    a(i, 1) = sigma;
    a(i, 2) = -1.0;
    b[i] = h * sigma;
  }
  LuFactorization<Complex> lu(a);
  if (!lu.ok()) {
    throw DomainError("probe " + std::string(probe) +
                      " is not a first-order response");
  }
  const auto x = lu.solve(b);
  FirstOrderTF tf;
  tf.pole = x[0].real() * w_ref;
  tf.k = x[1].real();
  tf.zero = tf.k != 0.0 ? x[2].real() / tf.k * w_ref : 0.0;
  return tf;
}

double measure_pole_hz(const Netlist& netlist, std::string_view probe,
                       PoleMethod method, const PoleSearchOptions& options) {
  const double crossing = estimate_pole_from_phase(netlist, probe, options);
  if (method == PoleMethod::kPhaseCrossing) return crossing;
  return -fit_first_order(netlist, probe, crossing).pole / (2.0 * kPi);
}

double SensitivityReport::at(std::string_view name) const {
  for (std::size_t i = 0; i < kSensitivityParams.size(); ++i) {
    if (kSensitivityParams[i] == name) return values[i];
  }
  throw DomainError("unknown sensitivity parameter " + std::string(name));
}

namespace {

struct Point {
  double r;
  double c;
  FdcciiParams p;
};

double& slot(Point& pt, std::size_t i) {
  switch (i) {
    case 0: return pt.r;
    case 1: return pt.c;
    case 2: return pt.p.alpha1;
    case 3: return pt.p.alpha2;
    case 4: return pt.p.beta1;
    case 5: return pt.p.beta2;
    case 6: return pt.p.beta3;
    case 7: return pt.p.beta4;
    case 8: return pt.p.beta5;
    default: return pt.p.beta6;
  }
}

}  // namespace

SensitivityReport sensitivities(double r, double c, const FdcciiParams& params,
                                const SensitivityOptions& options) {
  require_rc(r, c);
  const double h = options.rel_step;
  if (!(h > 1e-10 && h < 1e-2)) {
    throw DomainError("relative step must lie in (1e-10, 1e-2)");
  }
  auto pole_at = [&](const Point& pt) {
    return measure_pole_hz(build_fig2_netlist(pt.r, pt.c, pt.p), options.probe,
                           options.method, options.search);
  };
  const Point nominal{r, c, params};
  const double w0 = pole_at(nominal);

  SensitivityReport report;
  for (std::size_t i = 0; i < kSensitivityParams.size(); ++i) {
    Point up = nominal;
    Point down = nominal;
    slot(up, i) *= 1.0 + h;
    slot(down, i) *= 1.0 - h;
    report.values[i] = (pole_at(up) - pole_at(down)) / (2.0 * h * w0);
  }
  return report;
}

SensitivityReport sensitivities_closed_form() {
  SensitivityReport report;
  report.values = {-1.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0};
  return report;
}

std::optional<Fig2Parts> extract_fig2_parts(const Netlist& netlist) {
  const Resistor* r = nullptr;
  const Capacitor* c = nullptr;
  const Fdccii* x = nullptr;
  int nr = 0, nc = 0, nx = 0;
  for (const auto& e : netlist.elements()) {
    if (const auto* p = std::get_if<Resistor>(&e)) {
      r = p;
      ++nr;
    } else if (const auto* q = std::get_if<Capacitor>(&e)) {
      c = q;
      ++nc;
    } else if (const auto* y = std::get_if<Fdccii>(&e)) {
      x = y;
      ++nx;
    }
  }
  if (nr != 1 || nc != 1 || nx != 1) return std::nullopt;
  return Fig2Parts{r->ohms, c->farads, x->params, x->saturation};
}

VerificationReport verify_allpass(const Netlist& netlist, const SweepGrid& grid,
                                  double mag_tol, double phase_tol_rad,
                                  std::optional<double> rc) {
  const auto freqs = log_frequencies(grid);
  return verify_allpass(netlist, std::span<const double>(freqs), mag_tol,
                        phase_tol_rad, rc);
}

VerificationReport verify_allpass(const Netlist& netlist,
                                  std::span<const double> freqs_hz,
                                  double mag_tol, double phase_tol_rad,
                                  std::optional<double> rc) {
  VerificationReport report;
  if (freqs_hz.empty()) return report;

  if (!rc) {
    if (auto parts = extract_fig2_parts(netlist)) rc = parts->r * parts->c;
  }
  if (!rc) {
    report.pass = false;
    report.notes.push_back("cannot determine RC: need exactly one R and one C");
    return report;
  }
  for (auto label : {kProbeOut1, kProbeOut2}) {
    if (!netlist.find_probe(label)) {
      report.pass = false;
      report.notes.push_back("missing probe " + std::string(label));
    }
  }
  if (!report.pass) return report;

  const std::vector<std::string> probes = {std::string(kProbeOut1),
                                           std::string(kProbeOut2)};
  double worst_mag = 0.0;
  double worst_phase = 0.0;
  for (double f : freqs_hz) {
    const double w = 2.0 * kPi * f;
    std::vector<Complex> g;
    try {
      g = ac_gains(netlist, probes, w);
    } catch (const Error& e) {
      report.pass = false;
      report.notes.push_back(std::to_string(f) + " Hz: " + e.what());
      continue;
    }
    ++report.rows;
    const double law = 2.0 * std::atan(w * *rc);
    const double m1 = std::abs(std::abs(g[0]) - 1.0);
    const double m2 = std::abs(std::abs(g[1]) - 1.0);
    const double p1 = std::abs(wrap_rad(std::arg(g[0]) + law));
    const double p2 = std::abs(wrap_rad(std::arg(g[1]) - (kPi - law)));
    report.worst_mag_dev_out1 = std::max(report.worst_mag_dev_out1, m1);
    report.worst_mag_dev_out2 = std::max(report.worst_mag_dev_out2, m2);
    report.worst_phase_dev_out1 = std::max(report.worst_phase_dev_out1, p1);
    report.worst_phase_dev_out2 = std::max(report.worst_phase_dev_out2, p2);
    if (std::max(m1, m2) > worst_mag) {
      worst_mag = std::max(m1, m2);
      report.worst_mag_freq_hz = f;
    }
    if (std::max(p1, p2) > worst_phase) {
      worst_phase = std::max(p1, p2);
      report.worst_phase_freq_hz = f;
    }
    if (m1 > mag_tol || m2 > mag_tol || p1 > phase_tol_rad ||
        p2 > phase_tol_rad) {
      report.pass = false;
    }
  }
  return report;
}

}  // namespace fdsim
