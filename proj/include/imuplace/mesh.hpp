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

#ifndef IMUPLACE_MESH_HPP_
#define IMUPLACE_MESH_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace imuplace {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

using Face = std::array<std::uint32_t, 3>;
using VertexPositions = std::vector<Vec3>;

struct MeshTopology {
  std::uint32_t vertex_count = 0;
  std::vector<Face> faces;

  // Throws kInvalidInput when indices are out of range or repeated.
  void Validate() const;
};

// Vertex positions over time on a fixed topology. Positions are meters,
// world coordinates; sampling is uniform at `frame_rate`.
struct MeshSequence {
  MeshTopology topology;
  double frame_rate = 0.0;
  std::vector<VertexPositions> frames;

  double dt() const { return 1.0 / frame_rate; }
  std::size_t frame_count() const { return frames.size(); }

  // Checks topology, frame sizes, finiteness, frame_rate > 0 and the
  // three-frame minimum (kTooShortSequence).
  // Rest-pose files may hold a single frame; motion needs three.
  void Validate(std::size_t min_frames = 3) const;
};

// One virtual sensor site: a triangle (v1, v2, v3) of mesh vertices.
struct SurfacePatch {
  int id = 0;
  std::array<std::uint32_t, 3> vertices{};
  std::optional<std::string> label;
};

double TriangleArea(const Vec3& a, const Vec3& b, const Vec3& c);

}  // namespace imuplace

#endif  // IMUPLACE_MESH_HPP_
