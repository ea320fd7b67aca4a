// Copyright 2026 The URLSentinel Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "urlsentinel/errors.h"

namespace urlsentinel {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kDegenerateInput: return "degenerate_input";
    case ErrorCode::kDimensionMismatch: return "dimension_mismatch";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kFormat: return "format";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kHttpStatus: return "http_status";
    case ErrorCode::kNetwork: return "network";
    case ErrorCode::kTimeout: return "timeout";
    case ErrorCode::kMagicMismatch: return "magic_mismatch";
    case ErrorCode::kUnsupportedVersion: return "unsupported_version";
    case ErrorCode::kChecksum: return "checksum";
    case ErrorCode::kTruncated: return "truncated";
    case ErrorCode::kNonFinite: return "non_finite";
    case ErrorCode::kStaleCache: return "stale_cache";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(message), code_(code) {}

bool Error::retryable() const noexcept {
  return code_ == ErrorCode::kHttpStatus || code_ == ErrorCode::kNetwork ||
         code_ == ErrorCode::kTimeout;
}

}  // namespace urlsentinel
