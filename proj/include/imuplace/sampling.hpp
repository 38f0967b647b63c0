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

#ifndef IMUPLACE_SAMPLING_HPP_
#define IMUPLACE_SAMPLING_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "imuplace/mesh.hpp"

namespace imuplace {

// Undirected edge graph of a mesh, weighted by rest-pose edge length.
class VertexGraph {
 public:
  struct Edge {
    std::uint32_t to;
    double length;
  };

  VertexGraph() = default;
  explicit VertexGraph(std::vector<std::vector<Edge>> adjacency)
      : adjacency_(std::move(adjacency)) {}

  std::size_t vertex_count() const { return adjacency_.size(); }
  std::size_t edge_count() const;
  std::span<const Edge> neighbors(std::uint32_t v) const {
    return adjacency_[v];
  }

 private:
  std::vector<std::vector<Edge>> adjacency_;
};

struct PatchSet {
  std::vector<std::uint32_t> centers;
  std::vector<SurfacePatch> patches;
  std::uint64_t seed = 42;
};

inline constexpr std::uint64_t kDefaultFpsSeed = 42;
inline constexpr int kDefaultPatchCount = 512;

// One edge per unique mesh edge. Throws kDisconnectedMesh when the graph
// has more than one component, kInvalidInput on zero-length edges.
VertexGraph BuildAdjacency(const MeshTopology& topology,
                           std::span<const Vec3> rest_vertices);

// Multi-source shortest path distance over the edge graph.
std::vector<double> GeodesicDistances(const VertexGraph& graph,
                                      std::span<const std::uint32_t> sources);

// Vertex chosen as the first sample for `seed`.
std::uint32_t SeedVertex(std::uint64_t seed, std::size_t vertex_count);

// Farthest point sampling: the first center is SeedVertex(seed), every later
// center maximizes the distance to the selected set (ties: lowest index).
std::vector<std::uint32_t> FarthestPointSampling(const VertexGraph& graph,
                                                 int n, std::uint64_t seed);
std::vector<std::uint32_t> FarthestPointSamplingFrom(const VertexGraph& graph,
                                                     int n,
                                                     std::uint32_t start);

// Largest-area incident face of `center` (ties: lowest face index).
SurfacePatch PatchFromCenter(const MeshTopology& topology,
                             std::span<const Vec3> rest_vertices,
                             std::uint32_t center);

PatchSet SamplePatches(const MeshTopology& topology,
                       std::span<const Vec3> rest_vertices, int n,
                       std::uint64_t seed = kDefaultFpsSeed);

// Most common label among the patch vertices; when all three differ the
// center vertex decides.
std::string MajorityLabel(std::span<const std::string> vertex_labels,
                          const SurfacePatch& patch, std::uint32_t center);

}  // namespace imuplace

#endif  // IMUPLACE_SAMPLING_HPP_
