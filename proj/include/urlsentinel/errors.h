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

#ifndef URLSENTINEL_ERRORS_H_
#define URLSENTINEL_ERRORS_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace urlsentinel {

enum class ErrorCode {
  kInvalidArgument,
  kDegenerateInput,
  kDimensionMismatch,
  kConfig,
  kFormat,
  kIo,
  // Transport failures from fetch_feed. All three are retryable.
  kHttpStatus,
  kNetwork,
  kTimeout,
  // Model bundle decoding.
  kMagicMismatch,
  kUnsupportedVersion,
  kChecksum,
  kTruncated,
  kNonFinite,
  kStaleCache,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  bool retryable() const noexcept;

 private:
  ErrorCode code_;
};

}  // namespace urlsentinel

#endif  // URLSENTINEL_ERRORS_H_
