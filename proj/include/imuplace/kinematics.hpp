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

#ifndef IMUPLACE_KINEMATICS_HPP_
#define IMUPLACE_KINEMATICS_HPP_

#include <span>
#include <vector>

#include "imuplace/mesh.hpp"

namespace imuplace {

// Sensor pose derived from one patch triangle in one frame.
struct PatchFrame {
  Vec3 position = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();
  // Columns are the sensor axes in world coordinates (local -> world).
  // Column 2 equals `normal`.
  Mat3 rotation = Mat3::Identity();
};

struct GravityConfig {
  Vec3 g{0.0, -9.81, 0.0};
};

struct ImuSample {
  double t = 0.0;
  Vec3 accel = Vec3::Zero();  // m/s^2
  Vec3 gyro = Vec3::Zero();   // rad/s
};

struct ImuTrace {
  int patch_id = 0;
  double rate = 0.0;
  std::vector<ImuSample> samples;

  bool empty() const { return samples.empty(); }
  std::size_t size() const { return samples.size(); }
};

// Which frame the accelerometer's kinematic term is expressed in.
//   kLiteral: a_local (world) + R^T g, mixing the two frames.
//   kLocal: R^T (a_local + g), both terms in the sensor frame.
enum class AccelFrame { kLiteral, kLocal };

// Cross-product norms below this are treated as collapsed triangles.
inline constexpr double kDegenerateCrossNorm = 1e-12;

PatchFrame ComputePatchFrame(std::span<const Vec3> frame_vertices,
                             const SurfacePatch& patch);

// log(R)^vee as theta * axis, theta in [0, pi]. Throws kNotARotation when
// R is not orthonormal with det +1 to within 1e-6.
Vec3 RotationLog(const Mat3& rotation);

// Inverse of RotationLog (Rodrigues).
Mat3 RotationExp(const Vec3& axis_angle);

// World-frame angular velocity from log(R_curr * R_prev^T) / dt.
Vec3 AngularVelocity(const Mat3& prev, const Mat3& curr, double dt);

// Central second difference (p_next - 2 p_curr + p_prev) / dt^2.
Vec3 LinearAcceleration(const Vec3& prev, const Vec3& curr, const Vec3& next,
                        double dt);

// Specific force for a sensor with orientation `rotation` (local -> world).
Vec3 ImuAccel(const Vec3& a_local, const Mat3& rotation,
              const GravityConfig& gravity,
              AccelFrame frame = AccelFrame::kLocal);

// One sample per interior frame 1..F-2, timestamps k / frame_rate.
// Degenerate frames raise kDegenerateTriangle naming the frame index.
ImuTrace SynthesizeImu(const MeshSequence& seq, const SurfacePatch& patch,
                       const GravityConfig& gravity,
                       AccelFrame frame = AccelFrame::kLocal);

// Same as above but skips MeshSequence::Validate(); used by batch code that
// validated once.
ImuTrace SynthesizeImuUnchecked(const MeshSequence& seq,
                                const SurfacePatch& patch,
                                const GravityConfig& gravity, AccelFrame frame);

}  // namespace imuplace

#endif  // IMUPLACE_KINEMATICS_HPP_
