// Copyright 2026 The pdflow Authors
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

#ifndef PDFLOW_ERROR_HPP_
#define PDFLOW_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace pdflow {

/// Failure categories. The numeric values are mirrored by the C API status
/// codes in pdflow.h, so keep the two lists in sync.
enum class ErrorCode {
  kInput = 1,        // malformed arguments, dimension mismatch
  kDomain = 2,       // evaluation outside the admissible time/parameter range
  kSolver = 3,       // Newton or factorization failure
  kInfeasible = 4,   // no KKT point exists
  kDiverged = 5,     // non-finite state during integration
  kTruncated = 6,    // step budget exhausted
  kEstimation = 7,   // not enough data to fit a rate
  kConfig = 8,       // bad experiment configuration
  kIo = 9,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace pdflow

#endif  // PDFLOW_ERROR_HPP_
