// Copyright 2026 The segkit Authors. All Rights Reserved.
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

#ifndef SEGKIT_ERRORS_H_
#define SEGKIT_ERRORS_H_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace segkit {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input document. `byte_offset` points at the offending byte when
// the underlying parser knows it.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t byte_offset)
      : Error(what), byte_offset_(byte_offset) {}
  std::size_t byte_offset() const { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

// Well-formed input that breaks a data-model invariant. Carries every issue
// found, not only the first.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::string issue)
      : ValidationError(std::vector<std::string>{std::move(issue)}) {}
  explicit ValidationError(std::vector<std::string> issues)
      : Error(Join(issues)), issues_(std::move(issues)) {}

  const std::vector<std::string>& issues() const { return issues_; }

 private:
  static std::string Join(const std::vector<std::string>& issues) {
    std::string out;
    for (std::size_t i = 0; i < issues.size(); ++i) {
      if (i > 0) out += "; ";
      out += issues[i];
    }
    return out;
  }

  std::vector<std::string> issues_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace segkit

#endif  // SEGKIT_ERRORS_H_
