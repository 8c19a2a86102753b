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

#ifndef FDSIM_ANALYSIS_HPP_
#define FDSIM_ANALYSIS_HPP_

#include <array>
#include <complex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fdsim/mna.hpp"
#include "fdsim/netlist.hpp"

namespace fdsim {

// H(s) = k (s - zero) / (s - pole), zero and pole in rad/s.
struct FirstOrderTF {
  double k = 1.0;
  double zero = 0.0;
  double pole = -1.0;

  Complex eval(Complex s) const { return k * (s - zero) / (s - pole); }
  Complex eval_jw(double omega) const { return eval(Complex{0.0, omega}); }
};

enum class Output { kOut1, kOut2 };

// Which closed form to use for the inverting output under non-ideal gains.
// kBeta4FreeZero places the zero at beta5*alpha2/(RC); kDerivedMna places it at
// beta5*alpha2/(beta4*RC), which is what nodal analysis of the section gives.
// The two coincide when beta4 == 1.
enum class Out1Form { kBeta4FreeZero, kDerivedMna };

// Ideal section: VOUT1 = -(s - 1/RC)/(s + 1/RC), VOUT2 = (s - 1/RC)/(s + 1/RC).
FirstOrderTF oracle_ideal(double r, double c, Output output);

// VOUT2 = beta1 (s + alpha2 (beta1 beta5 - beta2 - beta2 beta4)/(beta1 RC))
//               / (s + beta5 alpha2 / RC)
// VOUT1 = -beta4 (s - z) / (s + beta5 alpha2 / RC), z per `form`.
FirstOrderTF oracle_nonideal(double r, double c, const FdcciiParams& params,
                             Output output,
                             Out1Form form = Out1Form::kDerivedMna);

// beta5 * alpha2 / (r c), rad/s.
double pole_frequency_closed_form(double r, double c,
                                  const FdcciiParams& params);

struct SweepGrid {
  double fstart_hz = 1.0;
  double fstop_hz = 1e8;
  int points_per_decade = 50;
};

// fstart * 10^(k/ppd) for k = 0, 1, ... while <= fstop (with a 1e-9 relative
// allowance so decade endpoints are kept). Throws DomainError on a bad grid;
// fstart == fstop yields one point.
std::vector<double> log_frequencies(const SweepGrid& grid);

struct SweepRow {
  double freq_hz = 0.0;
  std::vector<Complex> gains;  // aligned with SweepTable::probes
};

struct SweepTable {
  SweepGrid grid;
  std::vector<std::string> probes;
  std::vector<SweepRow> rows;
};

// One independent MNA solve per frequency. A SingularSystem is rethrown with
// the failing frequency in its message.
SweepTable ac_sweep(const Netlist& netlist,
                    const std::vector<std::string>& probes,
                    const SweepGrid& grid);

// Phase in degrees of each gain, unwrapped along the sequence starting from
// the principal value of the first element.
std::vector<double> unwrapped_phase_deg(const std::vector<Complex>& gains);

struct PoleSearchOptions {
  double rel_tol = 1e-6;  // bisection stops when width / midpoint < rel_tol
  double scan_fmin_hz = 1.0;
  double scan_fmax_hz = 1e9;
};

// Frequency (Hz) at which the probed phase crosses -90 deg (responses that
// start near 0 deg) or +90 deg (responses that start near 180 deg). A decade
// scan finds the bracket, bisection refines it. Throws NotAllPassLike when
// the scan finds no crossing.
double estimate_pole_from_phase(const Netlist& netlist,
                                std::string_view probe,
                                const PoleSearchOptions& options = {});

// Fits k (s - z)/(s - p) exactly through three simulated gains at
// f_ref * {0.5, 1, 2}. f_ref is the phase-crossing estimate unless given.
FirstOrderTF fit_first_order(const Netlist& netlist, std::string_view probe,
                             std::optional<double> f_ref_hz = {});

enum class PoleMethod {
  // -pole of fit_first_order(); isolates the denominator root.
  kRationalFit,
  // The +/-90 deg crossing. Equals the pole only while |zero| == |pole|,
  // so it is biased once tracking gains move the zero.
  kPhaseCrossing,
};

// Pole frequency in Hz measured from simulation.
double measure_pole_hz(const Netlist& netlist, std::string_view probe,
                       PoleMethod method = PoleMethod::kRationalFit,
                       const PoleSearchOptions& options = {});

inline constexpr std::array<std::string_view, 10> kSensitivityParams = {
    "R",     "C",     "alpha1", "alpha2", "beta1",
    "beta2", "beta3", "beta4",  "beta5",  "beta6"};

struct SensitivityReport {
  // (x / w0) dw0/dx, indexed like kSensitivityParams.
  std::array<double, 10> values{};

  double at(std::string_view name) const;
};

struct SensitivityOptions {
  double rel_step = 1e-6;
  PoleMethod method = PoleMethod::kRationalFit;
  std::string probe = std::string(kProbeOut1);
  PoleSearchOptions search = {};
};

// Central differences of the simulated pole frequency of the rebuilt
// section, one parameter at a time.
SensitivityReport sensitivities(double r, double c, const FdcciiParams& params,
                                const SensitivityOptions& options = {});

// Closed-form normalized sensitivities of beta5 alpha2 / (RC).
SensitivityReport sensitivities_closed_form();

struct Fig2Parts {
  double r = 0.0;
  double c = 0.0;
  FdcciiParams params;
  std::optional<SaturationSpec> saturation;
};

// R, C and gains of a netlist holding exactly one resistor, one capacitor and
// one FDCCII; nullopt otherwise.
std::optional<Fig2Parts> extract_fig2_parts(const Netlist& netlist);

struct VerificationReport {
  bool pass = true;
  std::size_t rows = 0;
  double worst_mag_dev_out1 = 0.0;
  double worst_mag_dev_out2 = 0.0;
  double worst_phase_dev_out1 = 0.0;  // rad
  double worst_phase_dev_out2 = 0.0;  // rad
  double worst_mag_freq_hz = 0.0;
  double worst_phase_freq_hz = 0.0;
  std::vector<std::string> notes;
};

// Checks unity magnitude at VOUT1/VOUT2 and the phase laws -2 atan(wRC) and
// pi - 2 atan(wRC) (modulo 2 pi). RC comes from `rc` or, if absent, from the
// netlist's single R and C. Missing probes or RC fail the report.
VerificationReport verify_allpass(const Netlist& netlist, const SweepGrid& grid,
                                  double mag_tol, double phase_tol_rad,
                                  std::optional<double> rc = {});

// Same checks over an explicit frequency list; an empty list passes
// vacuously.
VerificationReport verify_allpass(const Netlist& netlist,
                                  std::span<const double> freqs_hz,
                                  double mag_tol, double phase_tol_rad,
                                  std::optional<double> rc = {});

}  // namespace fdsim

#endif  // FDSIM_ANALYSIS_HPP_
