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

#ifndef FDSIM_ERRORS_HPP_
#define FDSIM_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace fdsim {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An argument violates an operation's precondition (non-positive R, unknown
// probe, tracking error out of range, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// The MNA matrix is structurally or numerically singular. `unknown` names the
// row that could not be pivoted, e.g. "V(A)" or "I(X1.X+)".
class SingularSystem : public Error {
 public:
  SingularSystem(std::string unknown, std::string what)
      : Error(std::move(what)), unknown_(std::move(unknown)) {}

  const std::string& unknown() const { return unknown_; }

 private:
  std::string unknown_;
};

// The probed response has no +/-90 degree phase crossing in 1 Hz .. 1 GHz.
class NotAllPassLike : public Error {
 public:
  using Error::Error;
};

class NonConvergence : public Error {
 public:
  NonConvergence(double time, int iterations, std::string what)
      : Error(std::move(what)), time_(time), iterations_(iterations) {}

  double time() const { return time_; }
  int iterations() const { return iterations_; }

 private:
  double time_;
  int iterations_;
};

// Fundamental amplitude below 1e-12 V; THD is undefined.
class NoFundamental : public Error {
 public:
  using Error::Error;
};

}  // namespace fdsim

#endif  // FDSIM_ERRORS_HPP_
