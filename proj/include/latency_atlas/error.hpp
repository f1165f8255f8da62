/* Copyright 2026 The Latency Atlas Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef LATENCY_ATLAS_ERROR_HPP_
#define LATENCY_ATLAS_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace latency_atlas {

// Every failure the library reports carries one of these codes. The CLI maps
// them onto process exit codes (see ExitCodeFor).
enum class ErrorCode {
  kUsage,            // bad flags / API misuse
  kValidation,       // a value outside its allowed range
  kShapeMismatch,    // adjacent layers disagree on tensor shape
  kInvalidGeometry,  // a layer would produce an empty output
  kParse,            // malformed JSON / CSV document
  kHeaderMismatch,   // CSV header does not match the layout contract
  kRowInvalid,       // a CSV row violates a sample invariant
  kEmptyInput,
  kDomain,           // math domain violation (loss targets, log arguments)
  kLayoutMismatch,   // features/datasets/models built for different layouts
  kVersion,          // unsupported archive format_version
  kChecksum,         // archive integrity failure
  kIo,
  kInternal,
};

std::string_view ErrorCodeName(ErrorCode code);

// 1: usage/validation, 2: data-contract violation, 3: internal error.
int ExitCodeFor(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace latency_atlas

#endif  // LATENCY_ATLAS_ERROR_HPP_
