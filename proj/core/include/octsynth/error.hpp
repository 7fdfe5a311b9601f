// Copyright 2026 The octsynth Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace octsynth {

/// Broad failure classes. The CLI maps them to process exit codes.
enum class ErrorKind {
  kValidation,           // bad argument, config or data invariant
  kMissingPrerequisite,  // an upstream stage artifact is absent
  kIo,                   // file system failure
  kFormat,               // container or manifest content is malformed
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what)
      : Error(ErrorKind::kValidation, what) {}
};

class MissingPrerequisiteError : public Error {
 public:
  explicit MissingPrerequisiteError(const std::string& what)
      : Error(ErrorKind::kMissingPrerequisite, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::kIo, what) {}
};

/// Container decoding failures. `reason()` is a stable short tag such as
/// "bad magic" or "truncated payload" so callers can tell them apart.
class FormatError : public Error {
 public:
  FormatError(std::string reason, const std::string& detail)
      : Error(ErrorKind::kFormat, reason + ": " + detail),
        reason_(std::move(reason)) {}

  const std::string& reason() const noexcept { return reason_; }

 private:
  std::string reason_;
};

}  // namespace octsynth
