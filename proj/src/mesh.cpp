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

#include <algorithm>
#include "imuplace/mesh.hpp"

#include <cmath>
#include <string>

#include <Eigen/Geometry>

#include "imuplace/error.hpp"

namespace imuplace {

void MeshTopology::Validate() const {
  if (vertex_count < 3) {
    throw Error(ErrorCode::kInvalidInput, "mesh needs at least 3 vertices");
  }
  if (faces.empty()) {
    throw Error(ErrorCode::kInvalidInput, "mesh has no faces");
  }
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const Face& face = faces[f];
    for (std::uint32_t idx : face) {
      if (idx >= vertex_count) {
        throw Error(ErrorCode::kInvalidInput,
                    "face " + std::to_string(f) + " references vertex " +
                        std::to_string(idx) + " >= " +
                        std::to_string(vertex_count));
      }
    }
    if (face[0] == face[1] || face[1] == face[2] || face[0] == face[2]) {
      throw Error(ErrorCode::kInvalidInput,
                  "face " + std::to_string(f) + " repeats a vertex");
    }
  }
}

void MeshSequence::Validate(std::size_t min_frames) const {
  topology.Validate();
  if (!(frame_rate > 0.0) || !std::isfinite(frame_rate)) {
    throw Error(ErrorCode::kInvalidInput, "frame_rate must be positive");
  }
  if (frames.size() < std::max<std::size_t>(min_frames, 1)) {
    throw Error(ErrorCode::kTooShortSequence,
                std::to_string(frames.size()) + " frames, need at least " +
                    std::to_string(std::max<std::size_t>(min_frames, 1)));
  }
  for (std::size_t f = 0; f < frames.size(); ++f) {
    if (frames[f].size() != topology.vertex_count) {
      throw Error(ErrorCode::kInvalidInput,
                  "frame " + std::to_string(f) + " has " +
                      std::to_string(frames[f].size()) + " vertices, expected " +
                      std::to_string(topology.vertex_count));
    }
    for (const Vec3& v : frames[f]) {
      if (!v.allFinite()) {
        throw Error(ErrorCode::kInvalidInput,
                    "non-finite coordinate in frame " + std::to_string(f));
      }
    }
  }
}

double TriangleArea(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * (b - a).cross(c - a).norm();
}

}  // namespace imuplace
