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

#include "imuplace/error.hpp"

namespace imuplace {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput: return "InvalidInput";
    case ErrorCode::kDegenerateTriangle: return "DegenerateTriangle";
    case ErrorCode::kNotARotation: return "NotARotation";
    case ErrorCode::kTooShortSequence: return "TooShortSequence";
    case ErrorCode::kDisconnectedMesh: return "DisconnectedMesh";
    case ErrorCode::kBadCount: return "BadCount";
    case ErrorCode::kIsolatedVertex: return "IsolatedVertex";
    case ErrorCode::kBadCutoff: return "BadCutoff";
    case ErrorCode::kEmptyTrace: return "EmptyTrace";
    case ErrorCode::kDegenerateLabels: return "DegenerateLabels";
    case ErrorCode::kEmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorCode::kEmptyTestSet: return "EmptyTestSet";
    case ErrorCode::kInsufficientData: return "InsufficientData";
    case ErrorCode::kUnknownActivity: return "UnknownActivity";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kZeroVariance: return "ZeroVariance";
    case ErrorCode::kAllExcluded: return "AllExcluded";
    case ErrorCode::kUnknownLocation: return "UnknownLocation";
    case ErrorCode::kTooManyLocations: return "TooManyLocations";
    case ErrorCode::kBadMagic: return "BadMagic";
    case ErrorCode::kTruncatedFile: return "TruncatedFile";
    case ErrorCode::kTopologyMismatch: return "TopologyMismatch";
    case ErrorCode::kUnreadablePath: return "UnreadablePath";
    case ErrorCode::kMalformedTable: return "MalformedTable";
    case ErrorCode::kPortInUse: return "PortInUse";
    case ErrorCode::kBadWorkspace: return "BadWorkspace";
    case ErrorCode::kIoFailure: return "IoFailure";
  }
  return "Unknown";
}

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kBadMagic:
    case ErrorCode::kTruncatedFile:
    case ErrorCode::kUnreadablePath:
    case ErrorCode::kIoFailure:
    case ErrorCode::kPortInUse:
      return 4;
    default:
      return 2;
  }
}

}  // namespace imuplace
