// Copyright 2026 The Authors.
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

#ifndef IMUPLACE_ERROR_HPP_
#define IMUPLACE_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace imuplace {

enum class ErrorCode {
  kInvalidInput,
  kDegenerateTriangle,
  kNotARotation,
  kTooShortSequence,
  kDisconnectedMesh,
  kBadCount,
  kIsolatedVertex,
  kBadCutoff,
  kEmptyTrace,
  kDegenerateLabels,
  kEmptyTrainingSet,
  kEmptyTestSet,
  kInsufficientData,
  kUnknownActivity,
  kLengthMismatch,
  kZeroVariance,
  kAllExcluded,
  kUnknownLocation,
  kTooManyLocations,
  kBadMagic,
  kTruncatedFile,
  kTopologyMismatch,
  kUnreadablePath,
  kMalformedTable,
  kPortInUse,
  kBadWorkspace,
  kIoFailure,
};

std::string_view ErrorCodeName(ErrorCode code);

// All library failures are reported through this type; `code()` is stable
// and maps onto CLI exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + detail),
        code_(code),
        detail_(detail) {}

  ErrorCode code() const { return code_; }
  const std::string& detail() const { return detail_; }

  // Prefixes `context` (stage, item) while keeping the original code.
  Error WithContext(const std::string& context) const {
    return Error(code_, context + ": " + detail_);
  }

 private:
  ErrorCode code_;
  std::string detail_;
};

// CLI exit codes: 2 invalid input, 4 I/O failure.
int ExitCodeFor(ErrorCode code);

}  // namespace imuplace

#endif  // IMUPLACE_ERROR_HPP_
