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

#ifndef IMUPLACE_TESTS_SUPPORT_HPP_
#define IMUPLACE_TESTS_SUPPORT_HPP_

#include <Eigen/Geometry>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "imuplace/mesh.hpp"
#include "imuplace/sampling.hpp"

namespace imuplace::testing {

namespace fs = std::filesystem;

// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "t") {
    static std::atomic<int> counter{0};
    const auto stamp =
        std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = fs::temp_directory_path() /
            ("imuplace-" + tag + "-" + std::to_string(stamp) + "-" +
             std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline Mat3 Rx(double a) { return Eigen::AngleAxisd(a, Vec3::UnitX()).toRotationMatrix(); }
inline Mat3 Ry(double a) { return Eigen::AngleAxisd(a, Vec3::UnitY()).toRotationMatrix(); }
inline Mat3 Rz(double a) { return Eigen::AngleAxisd(a, Vec3::UnitZ()).toRotationMatrix(); }

inline Vec3 RandomUnit(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec3 v;
  do {
    v = Vec3(n(rng), n(rng), n(rng));
  } while (v.norm() < 1e-6);
  return v.normalized();
}

inline Mat3 RandomRotation(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, M_PI);
  return Eigen::AngleAxisd(u(rng), RandomUnit(rng)).toRotationMatrix();
}

struct StaticMesh {
  MeshTopology topology;
  std::vector<Vec3> vertices;
};

// rows x cols height-field grid with jittered positions; each cell is split
// along a randomly chosen diagonal.
inline StaticMesh JitteredGrid(int rows, int cols, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> jitter(-0.3, 0.3);
  std::uniform_int_distribution<int> coin(0, 1);
  StaticMesh m;
  m.topology.vertex_count = static_cast<std::uint32_t>(rows * cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      m.vertices.emplace_back(c + jitter(rng), r + jitter(rng), jitter(rng));
    }
  }
  auto at = [cols](int r, int c) { return static_cast<std::uint32_t>(r * cols + c); };
  for (int r = 0; r + 1 < rows; ++r) {
    for (int c = 0; c + 1 < cols; ++c) {
      const auto a = at(r, c), b = at(r, c + 1), d = at(r + 1, c), e = at(r + 1, c + 1);
      if (coin(rng)) {
        m.topology.faces.push_back({a, b, e});
        m.topology.faces.push_back({a, e, d});
      } else {
        m.topology.faces.push_back({a, b, d});
        m.topology.faces.push_back({b, e, d});
      }
    }
  }
  return m;
}

// Path 0-1-...-(n-1) with unit edges.
inline VertexGraph PathGraph(std::uint32_t n) {
  std::vector<std::vector<VertexGraph::Edge>> adj(n);
  for (std::uint32_t i = 0; i + 1 < n; ++i) {
    adj[i].push_back({i + 1, 1.0});
    adj[i + 1].push_back({i, 1.0});
  }
  return VertexGraph(std::move(adj));
}

// Unit right triangle as a single-face topology.
inline StaticMesh UnitTriangle() {
  StaticMesh m;
  m.topology.vertex_count = 3;
  m.topology.faces = {{0, 1, 2}};
  m.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
  return m;
}

// Sequence of `frames` copies of a static mesh transformed by pose(k).
template <class Pose>
MeshSequence Animate(const StaticMesh& mesh, int frames, double rate, Pose pose) {
  MeshSequence seq;
  seq.topology = mesh.topology;
  seq.frame_rate = rate;
  for (int k = 0; k < frames; ++k) {
    VertexPositions f;
    f.reserve(mesh.vertices.size());
    for (const Vec3& v : mesh.vertices) f.push_back(pose(k, v));
    seq.frames.push_back(std::move(f));
  }
  return seq;
}

}  // namespace imuplace::testing

#endif  // IMUPLACE_TESTS_SUPPORT_HPP_
