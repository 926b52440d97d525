// Copyright 2026 The MPMI Shared Control Authors
//
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

#ifndef MPMI_ERRORS_H_
#define MPMI_ERRORS_H_

#include <stdexcept>
#include <string>

namespace mpmi {

// Invalid or inconsistent configuration. Maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed file content. Maps to exit code 2.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, long line)
      : std::runtime_error(what + " (line " + std::to_string(line) + ")"),
        line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

// Non-finite or out-of-domain numeric input.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Least-squares system without a unique solution.
class IllConditionedError : public std::runtime_error {
 public:
  IllConditionedError(const std::string& what, int dimension)
      : std::runtime_error(what), dimension_(dimension) {}
  int dimension() const { return dimension_; }

 private:
  int dimension_;
};

}  // namespace mpmi

#endif  // MPMI_ERRORS_H_
