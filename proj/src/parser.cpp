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

#include "fdsim/parser.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <utility>

namespace fdsim {

std::string_view to_string(ParseErrorKind kind) {
  switch (kind) {
    case ParseErrorKind::kUnknownCard: return "UnknownCard";
    case ParseErrorKind::kBadValue: return "BadValue";
    case ParseErrorKind::kBadNodeRef: return "BadNodeRef";
    case ParseErrorKind::kDuplicateName: return "DuplicateName";
    case ParseErrorKind::kMissingEnd: return "MissingEnd";
    case ParseErrorKind::kBadParam: return "BadParam";
  }
  return "Unknown";
}

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char ch) { return std::tolower(ch); });
  return out;
}

struct Token {
  std::string_view text;
  int column;  // 1-based
};

std::vector<Token> tokenize(std::string_view line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])))
      ++i;
    if (i >= line.size()) break;
    const std::size_t start = i;
    while (i < line.size() &&
           !std::isspace(static_cast<unsigned char>(line[i])))
      ++i;
    out.push_back({line.substr(start, i - start), static_cast<int>(start) + 1});
  }
  return out;
}

bool valid_node_name(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char ch) {
           return std::isalnum(ch) || ch == '_';
         });
}

struct Position {
  int line;
  int column;
};

struct PendingProbe {
  std::string label;
  std::string node;
  Position label_pos;
  Position node_pos;
};

class Parser {
 public:
  ParseResult run(std::string_view text);

 private:
  void error(int line, const Token& tok, ParseErrorKind kind,
             std::string message) {
    errors_.push_back({line, tok.column, std::move(message), kind});
  }

  bool node(int line, const Token& tok, NodeId& out) {
    if (!valid_node_name(tok.text)) {
      error(line, tok, ParseErrorKind::kBadNodeRef,
            "invalid node name '" + std::string(tok.text) + "'");
      return false;
    }
    out = NodeId{std::string(tok.text)};
    first_use_.emplace(out.name, Position{line, tok.column});
    return true;
  }

  bool value(int line, const Token& tok, double& out) {
    auto v = parse_value(tok.text);
    if (!v) {
      error(line, tok, ParseErrorKind::kBadValue,
            "malformed value '" + std::string(tok.text) + "'");
      return false;
    }
    out = *v;
    return true;
  }

  bool field_count(int line, const std::vector<Token>& toks, std::size_t lo,
                   std::size_t hi, std::string_view what) {
    if (toks.size() >= lo && toks.size() <= hi) return true;
    const Token& at = toks.size() > hi ? toks[hi] : toks.back();
    error(line, at, ParseErrorKind::kBadParam,
          std::string(what) + ": wrong number of fields");
    return false;
  }

  bool claim_name(int line, const Token& tok) {
    if (!names_.insert(lower(tok.text)).second) {
      error(line, tok, ParseErrorKind::kDuplicateName,
            "duplicate element name '" + std::string(tok.text) + "'");
      return false;
    }
    element_pos_.emplace(std::string(tok.text), Position{line, tok.column});
    return true;
  }

  void two_terminal(int line, const std::vector<Token>& toks, bool resistor);
  void source(int line, const std::vector<Token>& toks);
  void conveyor(int line, const std::vector<Token>& toks);
  void dot_card(int line, std::string_view raw, const std::vector<Token>& toks);
  void finish(int last_line);

  Netlist net_;
  std::vector<ParseError> errors_;
  std::set<std::string> names_;
  std::map<std::string, Position> first_use_;
  std::map<std::string, Position> element_pos_;
  std::vector<PendingProbe> probes_;
  bool ended_ = false;
};

void Parser::two_terminal(int line, const std::vector<Token>& toks,
                          bool resistor) {
  if (!field_count(line, toks, 4, 4, resistor ? "resistor" : "capacitor"))
    return;
  NodeId a, b;
  double v = 0.0;
  bool ok = node(line, toks[1], a);
  ok = node(line, toks[2], b) && ok;
  if (value(line, toks[3], v)) {
    if (!(v > 0.0)) {
      error(line, toks[3], ParseErrorKind::kBadValue, "non-positive value");
      ok = false;
    }
  } else {
    ok = false;
  }
  if (!claim_name(line, toks[0]) || !ok) return;
  const std::string name(toks[0].text);
  if (resistor) {
    net_.add(Resistor{name, a, b, v});
  } else {
    net_.add(Capacitor{name, a, b, v});
  }
}

void Parser::source(int line, const std::vector<Token>& toks) {
  if (toks.size() < 5) {
    field_count(line, toks, 5, 9, "voltage source");
    return;
  }
  NodeId np, nm;
  bool ok = node(line, toks[1], np);
  ok = node(line, toks[2], nm) && ok;
  const std::string kind = lower(toks[3].text);
  Waveform wave;
  if (kind == "ac") {
    // AC <amp> [PHASE <deg>]
    if (toks.size() != 5 && toks.size() != 7) {
      field_count(line, toks, 5, 5, "AC source");
      return;
    }
    AcWave ac;
    ok = value(line, toks[4], ac.amplitude) && ok;
    if (ok && ac.amplitude < 0.0) {
      error(line, toks[4], ParseErrorKind::kBadValue, "negative amplitude");
      ok = false;
    }
    if (toks.size() == 7) {
      if (lower(toks[5].text) != "phase") {
        error(line, toks[5], ParseErrorKind::kBadParam,
              "expected PHASE, got '" + std::string(toks[5].text) + "'");
        ok = false;
      } else {
        ok = value(line, toks[6], ac.phase_deg) && ok;
      }
    }
    wave = ac;
  } else if (kind == "sin") {
    // SIN <offset> <amp> <freq> [<phase>]
    if (!field_count(line, toks, 7, 8, "SIN source")) return;
    SinWave s;
    ok = value(line, toks[4], s.offset) && ok;
    if (value(line, toks[5], s.amplitude)) {
      if (s.amplitude < 0.0) {
        error(line, toks[5], ParseErrorKind::kBadValue, "negative amplitude");
        ok = false;
      }
    } else {
      ok = false;
    }
    if (value(line, toks[6], s.freq_hz)) {
      if (!(s.freq_hz > 0.0)) {
        error(line, toks[6], ParseErrorKind::kBadValue,
              "non-positive frequency");
        ok = false;
      }
    } else {
      ok = false;
    }
    if (toks.size() == 8) ok = value(line, toks[7], s.phase_deg) && ok;
    wave = s;
  } else {
    error(line, toks[3], ParseErrorKind::kBadParam,
          "expected AC or SIN, got '" + std::string(toks[3].text) + "'");
    return;
  }
  if (!claim_name(line, toks[0]) || !ok) return;
  net_.add(VSource{std::string(toks[0].text), np, nm, wave});
}

void Parser::conveyor(int line, const std::vector<Token>& toks) {
  if (toks.size() < 2) {
    field_count(line, toks, 10, 19, "FDCCII instance");
    return;
  }
  if (lower(toks[1].text) != "fdccii") {
    error(line, toks[1], ParseErrorKind::kUnknownCard,
          "unknown subcircuit model '" + std::string(toks[1].text) + "'");
    return;
  }
  if (!field_count(line, toks, 10, 19, "FDCCII instance")) return;

  Fdccii x;
  x.name = std::string(toks[0].text);
  bool ok = true;
  NodeId* slots[] = {&x.y1, &x.y2, &x.y3, &x.y4, &x.xp, &x.xm, &x.zp, &x.zm};
  for (int i = 0; i < 8; ++i) ok = node(line, toks[2 + i], *slots[i]) && ok;

  std::map<std::string, double*> gains = {
      {"a1", &x.params.alpha1}, {"a2", &x.params.alpha2},
      {"b1", &x.params.beta1},  {"b2", &x.params.beta2},
      {"b3", &x.params.beta3},  {"b4", &x.params.beta4},
      {"b5", &x.params.beta5},  {"b6", &x.params.beta6}};
  std::set<std::string> given;
  for (std::size_t i = 10; i < toks.size(); ++i) {
    const Token& tok = toks[i];
    const auto eq = tok.text.find('=');
    if (eq == std::string_view::npos || eq == 0) {
      error(line, tok, ParseErrorKind::kBadParam,
            "expected NAME=value, got '" + std::string(tok.text) + "'");
      ok = false;
      continue;
    }
    const std::string key = lower(tok.text.substr(0, eq));
    if (!given.insert(key).second) {
      error(line, tok, ParseErrorKind::kBadParam,
            "parameter '" + key + "' given twice");
      ok = false;
      continue;
    }
    const bool is_sat = key == "sat";
    if (!is_sat && !gains.contains(key)) {
      error(line, tok, ParseErrorKind::kBadParam,
            "unknown parameter '" + std::string(tok.text.substr(0, eq)) + "'");
      ok = false;
      continue;
    }
    auto v = parse_value(tok.text.substr(eq + 1));
    if (!v) {
      error(line, tok, ParseErrorKind::kBadValue,
            "malformed value '" + std::string(tok.text.substr(eq + 1)) + "'");
      ok = false;
      continue;
    }
    if (!(*v > 0.0)) {
      error(line, tok, ParseErrorKind::kBadParam,
            "parameter '" + key + "' must be positive");
      ok = false;
      continue;
    }
    if (is_sat) {
      x.saturation = SaturationSpec{*v};
    } else {
      *gains.at(key) = *v;
    }
  }
  if (!claim_name(line, toks[0]) || !ok) return;
  net_.add(std::move(x));
}

void Parser::dot_card(int line, std::string_view raw,
                      const std::vector<Token>& toks) {
  const std::string card = lower(toks[0].text);
  if (card == ".end") {
    if (toks.size() != 1) {
      field_count(line, toks, 1, 1, ".END");
    }
    ended_ = true;
  } else if (card == ".title") {
    std::string_view rest = raw.substr(toks[0].column - 1 + toks[0].text.size());
    while (!rest.empty() && std::isspace(static_cast<unsigned char>(rest.front())))
      rest.remove_prefix(1);
    while (!rest.empty() && std::isspace(static_cast<unsigned char>(rest.back())))
      rest.remove_suffix(1);
    net_.set_title(std::string(rest));
  } else if (card == ".probe") {
    if (!field_count(line, toks, 3, 3, ".PROBE")) return;
    if (!valid_node_name(toks[2].text)) {
      error(line, toks[2], ParseErrorKind::kBadNodeRef,
            "invalid node name '" + std::string(toks[2].text) + "'");
      return;
    }
    probes_.push_back({std::string(toks[1].text), std::string(toks[2].text),
                       {line, toks[1].column},
                       {line, toks[2].column}});
  } else {
    error(line, toks[0], ParseErrorKind::kUnknownCard,
          "unknown control card '" + std::string(toks[0].text) + "'");
  }
}

void Parser::finish(int last_line) {
  if (!ended_) {
    errors_.push_back({std::max(last_line, 1), 1, "missing .END",
                       ParseErrorKind::kMissingEnd});
  }

  std::set<std::string> labels;
  for (const auto& p : probes_) {
    if (!labels.insert(p.label).second) {
      errors_.push_back({p.label_pos.line, p.label_pos.column,
                         "duplicate probe label '" + p.label + "'",
                         ParseErrorKind::kDuplicateName});
      continue;
    }
    if (p.node != kGroundName && net_.find_node(p.node) == kUnknownIndex) {
      errors_.push_back({p.node_pos.line, p.node_pos.column,
                         "probe references unknown node '" + p.node + "'",
                         ParseErrorKind::kBadNodeRef});
      continue;
    }
    net_.add_probe(p.label, p.node);
  }
  if (!errors_.empty()) return;

  // Structural checks that need the whole file.
  for (const auto& v : validate(net_).violations) {
    Position at{1, 1};
    if (auto it = first_use_.find(v.subject); it != first_use_.end()) {
      at = it->second;
    } else if (auto et = element_pos_.find(v.subject);
               et != element_pos_.end()) {
      at = et->second;
    } else if (!element_pos_.empty()) {
      at = std::min_element(element_pos_.begin(), element_pos_.end(),
                            [](const auto& a, const auto& b) {
                              return a.second.line < b.second.line;
                            })
               ->second;
    }
    ParseErrorKind kind = ParseErrorKind::kBadNodeRef;
    if (v.kind == ViolationKind::kNonPositiveValue ||
        v.kind == ViolationKind::kBadWaveform) {
      kind = ParseErrorKind::kBadValue;
    } else if (v.kind == ViolationKind::kBadGain) {
      kind = ParseErrorKind::kBadParam;
    } else if (v.kind == ViolationKind::kDuplicateName) {
      kind = ParseErrorKind::kDuplicateName;
    }
    errors_.push_back({at.line, at.column, v.message, kind});
  }
}

ParseResult Parser::run(std::string_view text) {
  int line_no = 0;
  int last_nonempty = 0;
  std::size_t pos = 0;
  while (pos <= text.size() && !ended_) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view raw = text.substr(pos, nl - pos);
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    ++line_no;
    pos = nl + 1;

    const auto toks = tokenize(raw);
    if (toks.empty()) {
      if (nl == text.size()) break;
      continue;
    }
    last_nonempty = line_no;
    if (toks[0].text.front() == '*') continue;

    switch (std::tolower(static_cast<unsigned char>(toks[0].text.front()))) {
      case 'r': two_terminal(line_no, toks, true); break;
      case 'c': two_terminal(line_no, toks, false); break;
      case 'v': source(line_no, toks); break;
      case 'x': conveyor(line_no, toks); break;
      case '.': dot_card(line_no, raw, toks); break;
      default:
        error(line_no, toks[0], ParseErrorKind::kUnknownCard,
              "unknown card '" + std::string(toks[0].text) + "'");
    }
    if (nl == text.size()) break;
  }
  finish(last_nonempty);
  if (!errors_.empty()) return std::move(errors_);
  return std::move(net_);
}

}  // namespace

ParseResult parse(std::string_view text) {
  Parser p;
  return p.run(text);
}

std::optional<double> parse_value(std::string_view token) {
  if (token.empty()) return std::nullopt;
  std::string_view body = token;
  if (body.front() == '+') body.remove_prefix(1);
  if (body.empty() || body.front() == '+') return std::nullopt;

  double mantissa = 0.0;
  const char* first = body.data();
  const char* last = body.data() + body.size();
  auto [ptr, ec] = std::from_chars(first, last, mantissa,
                                   std::chars_format::general);
  if (ec != std::errc{} || !std::isfinite(mantissa)) return std::nullopt;
  // from_chars also accepts "inf"/"nan" spellings; a mantissa must start
  // with a digit, sign or point.
  const char lead = body.front() == '-' && body.size() > 1 ? body[1]
                                                           : body.front();
  if (!(std::isdigit(static_cast<unsigned char>(lead)) || lead == '.')) {
    return std::nullopt;
  }

  const std::string suffix = lower(std::string_view(ptr, last - ptr));
  int exponent = 0;
  if (suffix.empty()) {
    return mantissa;
  } else if (suffix == "meg") {
    exponent = 6;
  } else if (suffix.size() == 1) {
    switch (suffix[0]) {
      case 'f': exponent = -15; break;
      case 'p': exponent = -12; break;
      case 'n': exponent = -9; break;
      case 'u': exponent = -6; break;
      case 'm': exponent = -3; break;
      case 'k': exponent = 3; break;
      case 'g': exponent = 9; break;
      default: return std::nullopt;
    }
  } else {
    return std::nullopt;
  }
  // Re-reading "<mantissa>e<exponent>" rounds once instead of twice.
  const std::string_view digits(first, ptr - first);
  double v = mantissa * std::pow(10.0, exponent);
  if (digits.find_first_of("eE") == std::string_view::npos) {
    const std::string text =
        std::string(digits) + "e" + std::to_string(exponent);
    std::from_chars(text.data(), text.data() + text.size(), v,
                    std::chars_format::general);
  }
  if (!std::isfinite(v)) return std::nullopt;
  return v;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  double back = 0.0;
  std::from_chars(buf, buf + std::char_traits<char>::length(buf), back);
  if (back != v) std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

void append_gain(std::string& out, std::string_view key, double v) {
  if (v == 1.0) return;
  out += ' ';
  out += key;
  out += '=';
  out += format_number(v);
}

}  // namespace

std::string serialize(const Netlist& netlist) {
  std::string out;
  if (!netlist.title().empty()) out += ".TITLE " + netlist.title() + "\n";
  for (const auto& e : netlist.elements()) {
    std::visit(
        [&out](const auto& el) {
          using T = std::decay_t<decltype(el)>;
          if constexpr (std::is_same_v<T, Resistor>) {
            out += el.name + " " + el.n1.name + " " + el.n2.name + " " +
                   format_number(el.ohms);
          } else if constexpr (std::is_same_v<T, Capacitor>) {
            out += el.name + " " + el.n1.name + " " + el.n2.name + " " +
                   format_number(el.farads);
          } else if constexpr (std::is_same_v<T, VSource>) {
            out += el.name + " " + el.np.name + " " + el.nm.name;
            if (const auto* ac = std::get_if<AcWave>(&el.waveform)) {
              out += " AC " + format_number(ac->amplitude);
              if (ac->phase_deg != 0.0) {
                out += " PHASE " + format_number(ac->phase_deg);
              }
            } else {
              const auto& s = std::get<SinWave>(el.waveform);
              out += " SIN " + format_number(s.offset) + " " +
                     format_number(s.amplitude) + " " +
                     format_number(s.freq_hz) + " " +
                     format_number(s.phase_deg);
            }
          } else {
            out += el.name + " FDCCII";
            for (const NodeId* n : {&el.y1, &el.y2, &el.y3, &el.y4, &el.xp,
                                    &el.xm, &el.zp, &el.zm}) {
              out += " " + n->name;
            }
            const auto& p = el.params;
            append_gain(out, "A1", p.alpha1);
            append_gain(out, "A2", p.alpha2);
            append_gain(out, "B1", p.beta1);
            append_gain(out, "B2", p.beta2);
            append_gain(out, "B3", p.beta3);
            append_gain(out, "B4", p.beta4);
            append_gain(out, "B5", p.beta5);
            append_gain(out, "B6", p.beta6);
            if (el.saturation) {
              out += " SAT=" + format_number(el.saturation->vsat);
            }
          }
        },
        e);
    out += '\n';
  }
  for (const auto& p : netlist.probes()) {
    out += ".PROBE " + p.label + " " + p.node.name + "\n";
  }
  out += ".END\n";
  return out;
}

}  // namespace fdsim
