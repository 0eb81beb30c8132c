// Copyright 2026 The pivot-adapt Authors
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

#ifndef PIVOT_ERRORS_H_
#define PIVOT_ERRORS_H_

#include <stdexcept>
#include <string>

namespace pivot {

// Bad argument values: wrong dimensions, non-unit quaternions, negative std.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// API used out of order: backward before forward, step after done.
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A pipeline stage needs an artifact an earlier stage has not produced.
class MissingArtifact : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed configuration. `what()` starts with the offending field path.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file (CSV, checkpoint). Carries the line number when known.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, int line = 0)
      : std::runtime_error(line > 0 ? msg + " (line " + std::to_string(line) + ")"
                                    : msg),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

}  // namespace pivot

#endif  // PIVOT_ERRORS_H_
