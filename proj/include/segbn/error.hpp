// Copyright 2026 The segbn Authors.
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

#ifndef SEGBN_ERROR_HPP_
#define SEGBN_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace segbn {

// Error taxonomy shared by every module; the CLI maps kinds onto its
// machine-parsable diagnostic line.
enum class ErrorKind {
  kIo,             // unreadable/unwritable files
  kFormat,         // unsupported or corrupt file contents
  kParameter,      // caller-supplied value out of range
  kConfiguration,  // inconsistent run configuration (palette gaps, bad keys)
  kDegenerate,     // input admits no meaningful answer (constant image, ...)
  kSpec,           // invalid synthetic-image region layout
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace segbn

#endif  // SEGBN_ERROR_HPP_
