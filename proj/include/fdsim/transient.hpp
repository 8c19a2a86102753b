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

#ifndef FDSIM_TRANSIENT_HPP_
#define FDSIM_TRANSIENT_HPP_

#include <string>
#include <string_view>
#include <vector>

#include "fdsim/netlist.hpp"

namespace fdsim {

struct TransientResult {
  double step = 0.0;
  std::vector<double> times;                // i * step
  std::vector<std::string> probes;
  std::vector<std::vector<double>> traces;  // aligned with probes

  const std::vector<double>& trace(std::string_view probe) const;
};

struct TransientOptions {
  double newton_tol = 1e-12;  // on the update inf-norm, relative to max(1, |x|)
  int max_iterations = 50;
  int max_halvings = 8;
};

// Fixed-step trapezoidal integration from zero initial capacitor voltages.
// Capacitors use the companion G = 2C/h with history current
// G v_n + i_n; FDCCIIs are memoryless. FDCCIIs carrying a SaturationSpec
// clip their X outputs through vsat tanh(u / vsat), solved per step by damped
// Newton. AC-only sources are 0 V in the time domain.
//
// Throws DomainError (h <= 0, tstop < 10 h, no SIN source, bad probe),
// NonConvergence or SingularSystem.
TransientResult simulate(const Netlist& netlist, double h, double tstop,
                         const TransientOptions& options = {});

struct PhasorMeasurement {
  double amplitude = 0.0;
  double phase_deg = 0.0;  // relative to sin(2 pi f t), in (-180, 180]
  double freq_hz = 0.0;
};

// Single-bin Fourier projection of the probe trace over `window_cycles`
// periods after skipping `settle_cycles`. The window must hold an integer
// number of periods on the sample grid.
PhasorMeasurement measure_phasor(const TransientResult& result,
                                 std::string_view probe, double freq_hz,
                                 int settle_cycles, int window_cycles);

// 100 * sqrt(sum_{k=2}^{n_harmonics+1} A_k^2) / A_1, percent.
double thd(const TransientResult& result, std::string_view probe,
           double fundamental_hz, int n_harmonics = 9, int settle_cycles = 20,
           int window_cycles = 10);

struct ThdOptions {
  int n_harmonics = 9;
  int settle_cycles = 20;
  int window_cycles = 10;
  int steps_per_period = 200;
};

struct ThdRow {
  double input_amplitude = 0.0;
  std::vector<double> thd_percent;  // one per netlist probe, in probe order
};

// For each amplitude, drives the netlist's single voltage source with a sine
// of that amplitude at `freq_hz`, simulates, and measures THD at every probe.
// Amplitudes must be positive and ascending.
std::vector<ThdRow> thd_sweep(const Netlist& netlist,
                              const std::vector<double>& amplitudes,
                              double freq_hz, const ThdOptions& options = {});

}  // namespace fdsim

#endif  // FDSIM_TRANSIENT_HPP_
