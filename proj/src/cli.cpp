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

#include "fdsim/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "fdsim/analysis.hpp"
#include "fdsim/errors.hpp"
#include "fdsim/mna.hpp"
#include "fdsim/netlist.hpp"
#include "fdsim/parser.hpp"
#include "fdsim/transient.hpp"

namespace fdsim::cli {

namespace {

constexpr double kPi = std::numbers::pi;

// Thrown for bad flag values and unreadable inputs.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown after parse errors have been printed.
struct NetlistRejected {};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

double value_flag(const std::string& flag, const std::string& text) {
  auto v = parse_value(text);
  if (!v) throw UsageError("--" + flag + ": malformed value '" + text + "'");
  return *v;
}

double positive_flag(const std::string& flag, const std::string& text) {
  const double v = value_flag(flag, text);
  if (!(v > 0.0)) throw UsageError("--" + flag + " must be positive");
  return v;
}

Netlist load(const std::string& path, std::ostream& err) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read netlist '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  auto result = parse(buf.str());
  if (auto* errors = std::get_if<std::vector<ParseError>>(&result)) {
    for (const auto& e : *errors) {
      err << path << ":" << e.line << ":" << e.column << ": "
          << to_string(e.kind) << ": " << e.message << "\n";
    }
    throw NetlistRejected{};
  }
  return std::get<Netlist>(std::move(result));
}

// Writes to `path`, or to `out` when path is empty or "-".
class Sink {
 public:
  Sink(const std::string& path, std::ostream& out) {
    if (path.empty() || path == "-") {
      stream_ = &out;
    } else {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw UsageError("cannot write '" + path + "'");
      stream_ = file_.get();
    }
  }
  std::ostream& operator*() { return *stream_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_;
};

std::vector<std::string> probe_labels(const Netlist& net) {
  std::vector<std::string> out;
  for (const auto& p : net.probes()) out.push_back(p.label);
  if (out.empty()) throw UsageError("netlist declares no .PROBE");
  return out;
}

Fig2Parts fig2_parts(const Netlist& net) {
  auto parts = extract_fig2_parts(net);
  if (!parts) {
    throw UsageError(
        "netlist must hold exactly one R, one C and one FDCCII for this "
        "command");
  }
  return *parts;
}

struct Flags {
  std::string r, c, sat, freq;
  std::string a1, a2, b1, b2, b3, b4, b5, b6;
  std::string netlist, output;
  std::string fstart = "1", fstop = "100meg";
  int ppd = 50;
  std::string h, tstop;
  std::string probe;
  std::string method = "phase";
  std::string step = "1e-6";
  std::string mag_tol = "1e-9", phase_tol = "1e-9";
  std::string amps;
};

int cmd_gen_fig2(const Flags& f, std::ostream& out) {
  const double r = positive_flag("r", f.r);
  const double c = positive_flag("c", f.c);
  FdcciiParams p;
  const std::pair<const std::string*, double*> gains[] = {
      {&f.a1, &p.alpha1}, {&f.a2, &p.alpha2}, {&f.b1, &p.beta1},
      {&f.b2, &p.beta2},  {&f.b3, &p.beta3},  {&f.b4, &p.beta4},
      {&f.b5, &p.beta5},  {&f.b6, &p.beta6}};
  const char* names[] = {"a1", "a2", "b1", "b2", "b3", "b4", "b5", "b6"};
  for (std::size_t i = 0; i < 8; ++i) {
    if (!gains[i].first->empty()) {
      *gains[i].second = positive_flag(names[i], *gains[i].first);
    }
  }
  std::optional<SaturationSpec> sat;
  if (!f.sat.empty()) sat = SaturationSpec{positive_flag("sat", f.sat)};
  std::optional<Waveform> wave;
  if (!f.freq.empty()) {
    wave = SinWave{0.0, 1.0, positive_flag("freq", f.freq), 0.0};
  }
  Sink sink(f.output, out);
  *sink << serialize(build_fig2_netlist(r, c, p, sat, wave));
  return kOk;
}

int cmd_ac(const Flags& f, std::ostream& out, std::ostream& err) {
  const Netlist net = load(f.netlist, err);
  SweepGrid grid{positive_flag("fstart", f.fstart),
                 positive_flag("fstop", f.fstop), f.ppd};
  if (grid.fstop_hz < grid.fstart_hz) {
    throw UsageError("--fstop must not be below --fstart");
  }
  if (grid.points_per_decade < 1) throw UsageError("--ppd must be >= 1");
  const auto probes = probe_labels(net);
  const SweepTable table = ac_sweep(net, probes, grid);

  std::vector<std::vector<double>> phases(probes.size());
  for (std::size_t p = 0; p < probes.size(); ++p) {
    std::vector<Complex> g;
    for (const auto& row : table.rows) g.push_back(row.gains[p]);
    phases[p] = unwrapped_phase_deg(g);
  }
  Sink sink(f.output, out);
  std::ostream& os = *sink;
  os << "freq_hz";
  for (const auto& p : probes) {
    os << "," << p << "_mag," << p << "_db," << p << "_phase_deg";
  }
  os << "\n";
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    os << num(row.freq_hz);
    for (std::size_t p = 0; p < probes.size(); ++p) {
      const double mag = std::abs(row.gains[p]);
      os << "," << num(mag) << "," << num(20.0 * std::log10(mag)) << ","
         << num(phases[p][i]);
    }
    os << "\n";
  }
  return kOk;
}

int cmd_tran(const Flags& f, std::ostream& out, std::ostream& err) {
  const Netlist net = load(f.netlist, err);
  const double h = positive_flag("h", f.h);
  const double tstop = positive_flag("tstop", f.tstop);
  if (tstop < 10.0 * h) throw UsageError("--tstop must be >= 10 * --h");
  probe_labels(net);
  const TransientResult res = simulate(net, h, tstop);
  Sink sink(f.output, out);
  std::ostream& os = *sink;
  os << "time_s";
  for (const auto& p : res.probes) os << "," << p << "_v";
  os << "\n";
  for (std::size_t i = 0; i < res.times.size(); ++i) {
    os << num(res.times[i]);
    for (const auto& tr : res.traces) os << "," << num(tr[i]);
    os << "\n";
  }
  return kOk;
}

int cmd_poles(const Flags& f, std::ostream& out, std::ostream& err) {
  const Netlist net = load(f.netlist, err);
  std::string probe = f.probe;
  if (probe.empty()) {
    if (!net.find_probe(kProbeOut1)) {
      throw UsageError("--probe required: netlist has no VOUT1 probe");
    }
    probe = std::string(kProbeOut1);
  }
  if (!net.find_probe(probe)) throw UsageError("no probe named " + probe);
  PoleMethod method;
  if (f.method == "phase") {
    method = PoleMethod::kPhaseCrossing;
  } else if (f.method == "fit") {
    method = PoleMethod::kRationalFit;
  } else {
    throw UsageError("--method must be 'phase' or 'fit'");
  }
  const double measured = measure_pole_hz(net, probe, method);
  char buf[128];
  std::snprintf(buf, sizeof buf, "measured_pole_hz %.6g\n", measured);
  out << buf;
  if (auto parts = extract_fig2_parts(net)) {
    const double closed =
        pole_frequency_closed_form(parts->r, parts->c, parts->params) /
        (2.0 * kPi);
    std::snprintf(buf, sizeof buf, "closed_form_hz   %.6g\n", closed);
  } else {
    std::snprintf(buf, sizeof buf, "closed_form_hz   n/a\n");
  }
  out << buf;
  return kOk;
}

int cmd_sens(const Flags& f, std::ostream& out, std::ostream& err) {
  const Netlist net = load(f.netlist, err);
  const Fig2Parts parts = fig2_parts(net);
  SensitivityOptions opt;
  opt.rel_step = value_flag("step", f.step);
  if (!(opt.rel_step > 1e-10 && opt.rel_step < 1e-2)) {
    throw UsageError("--step must lie in (1e-10, 1e-2)");
  }
  const auto measured = sensitivities(parts.r, parts.c, parts.params, opt);
  const auto target = sensitivities_closed_form();
  out << "parameter measured target\n";
  char buf[128];
  for (std::size_t i = 0; i < kSensitivityParams.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%-6s %+.9f %+g\n",
                  std::string(kSensitivityParams[i]).c_str(),
                  measured.values[i] + 0.0, target.values[i]);
    out << buf;
  }
  return kOk;
}

int cmd_verify(const Flags& f, std::ostream& out, std::ostream& err) {
  const Netlist net = load(f.netlist, err);
  SweepGrid grid{positive_flag("fstart", f.fstart),
                 positive_flag("fstop", f.fstop), f.ppd};
  if (grid.fstop_hz < grid.fstart_hz) {
    throw UsageError("--fstop must not be below --fstart");
  }
  if (grid.points_per_decade < 1) throw UsageError("--ppd must be >= 1");
  const double mag_tol = positive_flag("mag-tol", f.mag_tol);
  const double phase_tol = positive_flag("phase-tol", f.phase_tol);
  const auto rep = verify_allpass(net, grid, mag_tol, phase_tol);
  out << "rows " << rep.rows << "\n"
      << "worst_mag_dev_vout1 " << num(rep.worst_mag_dev_out1) << "\n"
      << "worst_mag_dev_vout2 " << num(rep.worst_mag_dev_out2) << "\n"
      << "worst_phase_dev_vout1_rad " << num(rep.worst_phase_dev_out1) << "\n"
      << "worst_phase_dev_vout2_rad " << num(rep.worst_phase_dev_out2) << "\n"
      << "worst_mag_freq_hz " << num(rep.worst_mag_freq_hz) << "\n"
      << "worst_phase_freq_hz " << num(rep.worst_phase_freq_hz) << "\n";
  for (const auto& n : rep.notes) err << "note: " << n << "\n";
  out << (rep.pass ? "PASS" : "FAIL") << "\n";
  return rep.pass ? kOk : kVerificationFailed;
}

int cmd_thd(const Flags& f, std::ostream& out, std::ostream& err) {
  const Netlist net = load(f.netlist, err);
  const double freq = positive_flag("freq", f.freq);
  std::vector<double> amps;
  std::stringstream list(f.amps);
  for (std::string item; std::getline(list, item, ',');) {
    amps.push_back(positive_flag("amps", item));
  }
  for (std::size_t i = 1; i < amps.size(); ++i) {
    if (!(amps[i] > amps[i - 1])) throw UsageError("--amps must ascend");
  }
  const auto probes = probe_labels(net);
  const auto rows = thd_sweep(net, amps, freq);
  Sink sink(f.output, out);
  std::ostream& os = *sink;
  os << "amplitude_v";
  for (const auto& p : probes) os << "," << p << "_thd_pct";
  os << "\n";
  for (const auto& row : rows) {
    os << num(row.input_amplitude);
    for (double t : row.thd_percent) os << "," << num(t);
    os << "\n";
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Behavioral FDCCII all-pass simulator", "fdsim"};
  app.require_subcommand(1);
  Flags f;

  auto* gen = app.add_subcommand("gen", "Generate a netlist");
  gen->require_subcommand(1);
  auto* fig2 = gen->add_subcommand(
      "fig2", "Single-FDCCII first-order all-pass section");
  fig2->add_option("--r", f.r, "Resistance (suffixes allowed)")->required();
  fig2->add_option("--c", f.c, "Capacitance")->required();
  fig2->add_option("--a1", f.a1);
  fig2->add_option("--a2", f.a2);
  fig2->add_option("--b1", f.b1);
  fig2->add_option("--b2", f.b2);
  fig2->add_option("--b3", f.b3);
  fig2->add_option("--b4", f.b4);
  fig2->add_option("--b5", f.b5);
  fig2->add_option("--b6", f.b6);
  fig2->add_option("--sat", f.sat, "X-stage saturation voltage");
  fig2->add_option("--freq", f.freq,
                   "SIN source frequency (default: designed pole)");
  fig2->add_option("-o,--output", f.output);

  auto* ac = app.add_subcommand("ac", "AC sweep to CSV");
  ac->add_option("-n,--netlist", f.netlist)->required();
  ac->add_option("--fstart", f.fstart)->required();
  ac->add_option("--fstop", f.fstop)->required();
  ac->add_option("--ppd", f.ppd)->required();
  ac->add_option("-o,--output", f.output);

  auto* tran = app.add_subcommand("tran", "Transient run to CSV");
  tran->set_help_flag("--help", "Print this help message and exit");
  tran->add_option("-n,--netlist", f.netlist)->required();
  tran->add_option("--h", f.h)->required();
  tran->add_option("--tstop", f.tstop)->required();
  tran->add_option("-o,--output", f.output);

  auto* poles = app.add_subcommand("poles", "Measured vs closed-form pole");
  poles->add_option("-n,--netlist", f.netlist)->required();
  poles->add_option("--probe", f.probe, "Probe label (default VOUT1)");
  poles->add_option("--method", f.method, "phase (default) or fit");

  auto* sens = app.add_subcommand("sens", "Pole-frequency sensitivities");
  sens->add_option("-n,--netlist", f.netlist)->required();
  sens->add_option("--step", f.step, "Relative central-difference step");

  auto* verify = app.add_subcommand("verify", "All-pass verification");
  verify->add_option("-n,--netlist", f.netlist)->required();
  verify->add_option("--mag-tol", f.mag_tol);
  verify->add_option("--phase-tol", f.phase_tol, "radians");
  verify->add_option("--fstart", f.fstart);
  verify->add_option("--fstop", f.fstop);
  verify->add_option("--ppd", f.ppd);

  auto* thd_cmd = app.add_subcommand("thd", "THD versus drive amplitude");
  thd_cmd->add_option("-n,--netlist", f.netlist)->required();
  thd_cmd->add_option("--freq", f.freq)->required();
  thd_cmd->add_option("--amps", f.amps, "Comma-separated amplitudes")
      ->required();
  thd_cmd->add_option("-o,--output", f.output);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "fdsim: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (fig2->parsed()) return cmd_gen_fig2(f, out);
    if (ac->parsed()) return cmd_ac(f, out, err);
    if (tran->parsed()) return cmd_tran(f, out, err);
    if (poles->parsed()) return cmd_poles(f, out, err);
    if (sens->parsed()) return cmd_sens(f, out, err);
    if (verify->parsed()) return cmd_verify(f, out, err);
    if (thd_cmd->parsed()) return cmd_thd(f, out, err);
  } catch (const NetlistRejected&) {
    return kParseError;
  } catch (const UsageError& e) {
    err << "fdsim: " << e.what() << "\n";
    return kUsage;
  } catch (const DomainError& e) {
    err << "fdsim: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    err << "fdsim: numerical error: " << e.what() << "\n";
    return kNumerical;
  }
  err << "fdsim: no command\n";
  return kUsage;
}

}  // namespace fdsim::cli
