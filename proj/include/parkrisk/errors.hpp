// Copyright 2026 The parkrisk Authors
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

#ifndef PARKRISK__ERRORS_HPP_
#define PARKRISK__ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace parkrisk
{

/// Invalid input or configuration. The CLI maps this to exit code 1.
class ValidationError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// A malformed record in a line-oriented stream. `line()` is 1-based, 0 if unknown.
class ParseError : public ValidationError
{
public:
  ParseError(std::size_t line, const std::string & what)
  : ValidationError(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line)
  {
  }

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

/// Filesystem or socket failure. The CLI maps this to exit code 2.
class IoError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

}  // namespace parkrisk

#endif  // PARKRISK__ERRORS_HPP_
