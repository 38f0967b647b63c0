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

#include "imuplace/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <random>
#include <string>
#include <utility>

#include <Eigen/Geometry>

#include "imuplace/error.hpp"

namespace imuplace {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using QueueEntry = std::pair<double, std::uint32_t>;
using MinQueue =
    std::priority_queue<QueueEntry, std::vector<QueueEntry>, std::greater<>>;

// Dijkstra from `source` that only relaxes vertices whose distance improves
// on `dist`; leaves `dist` as the pointwise minimum.
void RelaxFrom(const VertexGraph& graph, std::uint32_t source,
               std::vector<double>& dist) {
  MinQueue queue;
  dist[source] = 0.0;
  queue.emplace(0.0, source);
  while (!queue.empty()) {
    const auto [d, u] = queue.top();
    queue.pop();
    if (d > dist[u]) continue;
    for (const VertexGraph::Edge& e : graph.neighbors(u)) {
      const double nd = d + e.length;
      if (nd < dist[e.to]) {
        dist[e.to] = nd;
        queue.emplace(nd, e.to);
      }
    }
  }
}

}  // namespace

std::size_t VertexGraph::edge_count() const {
  std::size_t twice = 0;
  for (const auto& list : adjacency_) twice += list.size();
  return twice / 2;
}

VertexGraph BuildAdjacency(const MeshTopology& topology,
                           std::span<const Vec3> rest_vertices) {
  topology.Validate();
  if (rest_vertices.size() != topology.vertex_count) {
    throw Error(ErrorCode::kInvalidInput,
                "rest pose has " + std::to_string(rest_vertices.size()) +
                    " vertices, topology has " +
                    std::to_string(topology.vertex_count));
  }

  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  edges.reserve(topology.faces.size() * 3);
  for (const Face& f : topology.faces) {
    for (int i = 0; i < 3; ++i) {
      std::uint32_t a = f[i];
      std::uint32_t b = f[(i + 1) % 3];
      if (a > b) std::swap(a, b);
      edges.emplace_back(a, b);
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  std::vector<std::vector<VertexGraph::Edge>> adjacency(topology.vertex_count);
  for (const auto& [a, b] : edges) {
    const double length = (rest_vertices[a] - rest_vertices[b]).norm();
    if (!(length > 0.0) || !std::isfinite(length)) {
      throw Error(ErrorCode::kInvalidInput,
                  "edge (" + std::to_string(a) + "," + std::to_string(b) +
                      ") has non-positive length");
    }
    adjacency[a].push_back({b, length});
    adjacency[b].push_back({a, length});
  }

  // Connectivity via BFS from vertex 0.
  std::vector<char> seen(topology.vertex_count, 0);
  std::vector<std::uint32_t> stack = {0};
  seen[0] = 1;
  std::size_t reached = 1;
  while (!stack.empty()) {
    const std::uint32_t u = stack.back();
    stack.pop_back();
    for (const auto& e : adjacency[u]) {
      if (!seen[e.to]) {
        seen[e.to] = 1;
        ++reached;
        stack.push_back(e.to);
      }
    }
  }
  if (reached != topology.vertex_count) {
    throw Error(ErrorCode::kDisconnectedMesh,
                std::to_string(topology.vertex_count - reached) + " of " +
                    std::to_string(topology.vertex_count) +
                    " vertices unreachable from vertex 0");
  }
  return VertexGraph(std::move(adjacency));
}

std::vector<double> GeodesicDistances(const VertexGraph& graph,
                                      std::span<const std::uint32_t> sources) {
  if (sources.empty()) {
    throw Error(ErrorCode::kInvalidInput, "no source vertices");
  }
  std::vector<double> dist(graph.vertex_count(), kInf);
  MinQueue queue;
  for (std::uint32_t s : sources) {
    if (s >= graph.vertex_count()) {
      throw Error(ErrorCode::kInvalidInput,
                  "source " + std::to_string(s) + " out of range");
    }
    dist[s] = 0.0;
    queue.emplace(0.0, s);
  }
  while (!queue.empty()) {
    const auto [d, u] = queue.top();
    queue.pop();
    if (d > dist[u]) continue;
    for (const auto& e : graph.neighbors(u)) {
      const double nd = d + e.length;
      if (nd < dist[e.to]) {
        dist[e.to] = nd;
        queue.emplace(nd, e.to);
      }
    }
  }
  return dist;
}

std::uint32_t SeedVertex(std::uint64_t seed, std::size_t vertex_count) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint64_t> pick(0, vertex_count - 1);
  return static_cast<std::uint32_t>(pick(rng));
}

std::vector<std::uint32_t> FarthestPointSampling(const VertexGraph& graph,
                                                 int n, std::uint64_t seed) {
  if (graph.vertex_count() == 0) {
    throw Error(ErrorCode::kBadCount, "empty graph");
  }
  return FarthestPointSamplingFrom(graph, n,
                                   SeedVertex(seed, graph.vertex_count()));
}

std::vector<std::uint32_t> FarthestPointSamplingFrom(const VertexGraph& graph,
                                                     int n,
                                                     std::uint32_t start) {
  const std::size_t vertex_count = graph.vertex_count();
  if (n < 1 || static_cast<std::size_t>(n) > vertex_count) {
    throw Error(ErrorCode::kBadCount,
                "n = " + std::to_string(n) + " outside [1, " +
                    std::to_string(vertex_count) + "]");
  }
  if (start >= vertex_count) {
    throw Error(ErrorCode::kInvalidInput, "start vertex out of range");
  }

  std::vector<std::uint32_t> centers;
  centers.reserve(n);
  std::vector<char> chosen(vertex_count, 0);
  std::vector<double> dist(vertex_count, kInf);

  std::uint32_t next = start;
  while (true) {
    centers.push_back(next);
    chosen[next] = 1;
    if (centers.size() == static_cast<std::size_t>(n)) break;
    RelaxFrom(graph, next, dist);

    double best = -1.0;
    for (std::uint32_t v = 0; v < vertex_count; ++v) {
      if (!chosen[v] && dist[v] > best) {
        best = dist[v];
        next = v;
      }
    }
  }
  return centers;
}

SurfacePatch PatchFromCenter(const MeshTopology& topology,
                             std::span<const Vec3> rest_vertices,
                             std::uint32_t center) {
  if (center >= topology.vertex_count || center >= rest_vertices.size()) {
    throw Error(ErrorCode::kInvalidInput,
                "center " + std::to_string(center) + " out of range");
  }
  double best_area = -1.0;
  const Face* best_face = nullptr;
  for (const Face& f : topology.faces) {
    if (f[0] != center && f[1] != center && f[2] != center) continue;
    const double area = TriangleArea(rest_vertices[f[0]], rest_vertices[f[1]],
                                     rest_vertices[f[2]]);
    if (area > best_area) {
      best_area = area;
      best_face = &f;
    }
  }
  if (best_face == nullptr) {
    throw Error(ErrorCode::kIsolatedVertex,
                "vertex " + std::to_string(center) + " has no incident face");
  }
  SurfacePatch patch;
  patch.vertices = *best_face;
  return patch;
}

PatchSet SamplePatches(const MeshTopology& topology,
                       std::span<const Vec3> rest_vertices, int n,
                       std::uint64_t seed) {
  const VertexGraph graph = BuildAdjacency(topology, rest_vertices);
  PatchSet set;
  set.seed = seed;
  set.centers = FarthestPointSampling(graph, n, seed);
  set.patches.reserve(set.centers.size());
  for (std::size_t i = 0; i < set.centers.size(); ++i) {
    SurfacePatch patch = PatchFromCenter(topology, rest_vertices,
                                         set.centers[i]);
    patch.id = static_cast<int>(i);
    set.patches.push_back(std::move(patch));
  }
  return set;
}

std::string MajorityLabel(std::span<const std::string> vertex_labels,
                          const SurfacePatch& patch, std::uint32_t center) {
  const auto& v = patch.vertices;
  for (std::uint32_t i : {v[0], v[1], v[2], center}) {
    if (i >= vertex_labels.size()) {
      throw Error(ErrorCode::kInvalidInput, "vertex label index out of range");
    }
  }
  const std::string& a = vertex_labels[v[0]];
  const std::string& b = vertex_labels[v[1]];
  const std::string& c = vertex_labels[v[2]];
  if (a == b || a == c) return a;
  if (b == c) return b;
  return vertex_labels[center];
}

}  // namespace imuplace
