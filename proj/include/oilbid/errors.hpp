// Copyright 2026 The oilbid Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef OILBID_ERRORS_HPP_
#define OILBID_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace oilbid {

// Dimension or parameter mismatch in campaign/engine/network configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Caller passed data violating an operation's precondition.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed campaign or checkpoint file. `line()` is 1-based, 0 if unknown.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class EpisodeFinished : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Exhaustive search refused because the instance is too large.
class SizeError : public std::length_error {
 public:
  using std::length_error::length_error;
};

// Training produced a non-finite loss or parameter.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Two slots share the accept/reject boundary efficiency.
class DegenerateInput : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace oilbid

#endif  // OILBID_ERRORS_HPP_
