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

#ifndef FDSIM_PARSER_HPP_
#define FDSIM_PARSER_HPP_

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "fdsim/netlist.hpp"

namespace fdsim {

enum class ParseErrorKind {
  kUnknownCard,
  kBadValue,
  kBadNodeRef,
  kDuplicateName,
  kMissingEnd,
  kBadParam,
};

std::string_view to_string(ParseErrorKind kind);

struct ParseError {
  int line = 1;    // 1-based
  int column = 1;  // 1-based, inside the offending token
  std::string message;
  ParseErrorKind kind = ParseErrorKind::kBadValue;
};

// Either a validated netlist or every error found in the text.
using ParseResult = std::variant<Netlist, std::vector<ParseError>>;

// Grammar (one card per line, '*' starts a comment line, keywords are
// case-insensitive, node names are [A-Za-z0-9_]+ with "0" as ground):
//
//   .TITLE <text>
//   R<name> n1 n2 <value>
//   C<name> n1 n2 <value>
//   V<name> np nm AC <amp> [PHASE <deg>]
//   V<name> np nm SIN <offset> <amp> <freq> [<phase_deg>]
//   X<name> FDCCII y1 y2 y3 y4 xp xm zp zm [A1=<v> A2=<v> B1=<v> .. B6=<v>]
//                                           [SAT=<vsat>]
//   .PROBE <label> <node>
//   .END
//
// Never throws; collects all errors rather than stopping at the first.
ParseResult parse(std::string_view text);

// Decimal or scientific mantissa with an optional case-insensitive suffix:
// f p n u m k meg g. Returns nullopt on a malformed mantissa or unknown
// suffix.
std::optional<double> parse_value(std::string_view token);

// Canonical text; parse(serialize(n)) == n for every valid n.
std::string serialize(const Netlist& netlist);

// Shortest of %.15g / %.17g that reproduces `v` exactly.
std::string format_number(double v);

}  // namespace fdsim

#endif  // FDSIM_PARSER_HPP_
