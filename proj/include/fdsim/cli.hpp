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

#ifndef FDSIM_CLI_HPP_
#define FDSIM_CLI_HPP_

#include <iosfwd>
#include <string>
#include <vector>

namespace fdsim::cli {

enum ExitCode : int {
  kOk = 0,
  kVerificationFailed = 1,
  kUsage = 2,
  kParseError = 3,
  kNumerical = 4,
};

// Runs one command line (args excludes the program name). Data goes to `out`
// unless a subcommand writes to a file; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace fdsim::cli

#endif  // FDSIM_CLI_HPP_
