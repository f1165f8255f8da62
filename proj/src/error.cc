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

#include "latency_atlas/error.hpp"

namespace latency_atlas {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUsage: return "usage";
    case ErrorCode::kValidation: return "validation";
    case ErrorCode::kShapeMismatch: return "shape-mismatch";
    case ErrorCode::kInvalidGeometry: return "invalid-geometry";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kHeaderMismatch: return "header-mismatch";
    case ErrorCode::kRowInvalid: return "row-invalid";
    case ErrorCode::kEmptyInput: return "empty-input";
    case ErrorCode::kDomain: return "domain";
    case ErrorCode::kLayoutMismatch: return "layout-mismatch";
    case ErrorCode::kVersion: return "version";
    case ErrorCode::kChecksum: return "checksum";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kInternal: return "internal";
  }
  return "unknown";
}

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUsage:
    case ErrorCode::kValidation:
    case ErrorCode::kShapeMismatch:
    case ErrorCode::kInvalidGeometry:
      return 1;
    case ErrorCode::kParse:
    case ErrorCode::kHeaderMismatch:
    case ErrorCode::kRowInvalid:
    case ErrorCode::kEmptyInput:
    case ErrorCode::kDomain:
    case ErrorCode::kLayoutMismatch:
    case ErrorCode::kVersion:
    case ErrorCode::kChecksum:
    case ErrorCode::kIo:
      return 2;
    case ErrorCode::kInternal:
      return 3;
  }
  return 3;
}

}  // namespace latency_atlas
