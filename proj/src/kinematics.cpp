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

#include "imuplace/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Geometry>
#include <Eigen/LU>

#include "imuplace/error.hpp"

namespace imuplace {
namespace {

constexpr double kRotationTolerance = 1e-6;
constexpr double kSmallAngle = 1e-7;
constexpr double kNearPiWindow = 1e-4;

Vec3 Vee(const Mat3& m) {
  return Vec3(m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1));
}

Mat3 Hat(const Vec3& w) {
  Mat3 m;
  m << 0.0, -w.z(), w.y(),
       w.z(), 0.0, -w.x(),
       -w.y(), w.x(), 0.0;
  return m;
}

// Index of the largest-magnitude coefficient; ties go to the lowest index.
int DominantIndex(const Vec3& v) {
  int best = 0;
  for (int i = 1; i < 3; ++i) {
    if (std::abs(v[i]) > std::abs(v[best])) best = i;
  }
  return best;
}

}  // namespace

PatchFrame ComputePatchFrame(std::span<const Vec3> frame_vertices,
                             const SurfacePatch& patch) {
  for (std::uint32_t idx : patch.vertices) {
    if (idx >= frame_vertices.size()) {
      throw Error(ErrorCode::kInvalidInput,
                  "patch " + std::to_string(patch.id) + " vertex " +
                      std::to_string(idx) + " out of range");
    }
  }
  const Vec3& v1 = frame_vertices[patch.vertices[0]];
  const Vec3& v2 = frame_vertices[patch.vertices[1]];
  const Vec3& v3 = frame_vertices[patch.vertices[2]];

  const Vec3 edge1 = v2 - v1;
  const Vec3 cross = edge1.cross(v3 - v1);
  const double cross_norm = cross.norm();
  if (!(cross_norm >= kDegenerateCrossNorm)) {
    throw Error(ErrorCode::kDegenerateTriangle,
                "patch " + std::to_string(patch.id) + " is collapsed");
  }

  PatchFrame frame;
  frame.position = (v1 + v2 + v3) / 3.0;
  frame.normal = cross / cross_norm;
  const Vec3 e1 = edge1.normalized();
  const Vec3 e2 = frame.normal.cross(e1);
  frame.rotation.col(0) = e1;
  frame.rotation.col(1) = e2;
  frame.rotation.col(2) = frame.normal;
  return frame;
}

Vec3 RotationLog(const Mat3& r) {
  if (!r.allFinite()) {
    throw Error(ErrorCode::kNotARotation, "non-finite matrix");
  }
  const double ortho_err =
      (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff();
  const double det = r.determinant();
  if (ortho_err > kRotationTolerance ||
      std::abs(det - 1.0) > kRotationTolerance) {
    throw Error(ErrorCode::kNotARotation,
                "orthonormality error " + std::to_string(ortho_err) +
                    ", det " + std::to_string(det));
  }

  const Vec3 skew = Vee(r);
  const double cos_theta = std::clamp(0.5 * (r.trace() - 1.0), -1.0, 1.0);
  // atan2 form of arccos((tr - 1) / 2); better conditioned near 0 and pi.
  const double theta = std::atan2(0.5 * skew.norm(), cos_theta);

  if (theta < kSmallAngle) {
    return 0.5 * skew;
  }
  if (theta > std::numbers::pi - kNearPiWindow) {
    // Symmetric part is cos(theta) I + (1 - cos(theta)) a a^T.
    const Mat3 sym = 0.5 * (r + r.transpose());
    const Mat3 outer =
        (sym - cos_theta * Mat3::Identity()) / (1.0 - cos_theta);
    int col = 0;
    for (int i = 1; i < 3; ++i) {
      if (outer(i, i) > outer(col, col)) col = i;
    }
    Vec3 axis = outer.col(col) / std::sqrt(std::max(outer(col, col), 0.0));
    axis.normalize();
    const double alignment = axis.dot(skew);
    if (alignment < -1e-12) {
      axis = -axis;
    } else if (alignment <= 1e-12 && axis[DominantIndex(axis)] < 0.0) {
      axis = -axis;
    }
    return theta * axis;
  }
  return (theta / (2.0 * std::sin(theta))) * skew;
}

Mat3 RotationExp(const Vec3& w) {
  const double theta = w.norm();
  const Mat3 k = Hat(w);
  if (theta < 1e-8) {
    return Mat3::Identity() + k + 0.5 * k * k;
  }
  return Mat3::Identity() + (std::sin(theta) / theta) * k +
         ((1.0 - std::cos(theta)) / (theta * theta)) * k * k;
}

Vec3 AngularVelocity(const Mat3& prev, const Mat3& curr, double dt) {
  if (!(dt > 0.0)) {
    throw Error(ErrorCode::kInvalidInput, "dt must be positive");
  }
  if (prev == curr) return Vec3::Zero();
  const Mat3 delta = curr * prev.transpose();
  return RotationLog(delta) / dt;
}

Vec3 LinearAcceleration(const Vec3& prev, const Vec3& curr, const Vec3& next,
                        double dt) {
  if (!(dt > 0.0)) {
    throw Error(ErrorCode::kInvalidInput, "dt must be positive");
  }
  return (next - 2.0 * curr + prev) / (dt * dt);
}

Vec3 ImuAccel(const Vec3& a_local, const Mat3& rotation,
              const GravityConfig& gravity, AccelFrame frame) {
  const Vec3 gravity_local = rotation.transpose() * gravity.g;
  if (frame == AccelFrame::kLiteral) {
    return a_local + gravity_local;
  }
  return rotation.transpose() * a_local + gravity_local;
}

ImuTrace SynthesizeImu(const MeshSequence& seq, const SurfacePatch& patch,
                       const GravityConfig& gravity, AccelFrame frame) {
  seq.Validate();
  return SynthesizeImuUnchecked(seq, patch, gravity, frame);
}

ImuTrace SynthesizeImuUnchecked(const MeshSequence& seq,
                                const SurfacePatch& patch,
                                const GravityConfig& gravity,
                                AccelFrame frame) {
  const std::size_t frame_count = seq.frames.size();
  if (frame_count < 3) {
    throw Error(ErrorCode::kTooShortSequence,
                std::to_string(frame_count) + " frames");
  }
  const double dt = seq.dt();

  std::vector<PatchFrame> frames;
  frames.reserve(frame_count);
  for (std::size_t f = 0; f < frame_count; ++f) {
    try {
      frames.push_back(ComputePatchFrame(seq.frames[f], patch));
    } catch (const Error& e) {
      throw e.WithContext("frame " + std::to_string(f));
    }
  }

  ImuTrace trace;
  trace.patch_id = patch.id;
  trace.rate = seq.frame_rate;
  trace.samples.reserve(frame_count - 2);
  for (std::size_t k = 1; k + 1 < frame_count; ++k) {
    const Vec3 a_local = LinearAcceleration(
        frames[k - 1].position, frames[k].position, frames[k + 1].position,
        dt);
    ImuSample s;
    s.t = static_cast<double>(k) / seq.frame_rate;
    s.gyro = AngularVelocity(frames[k - 1].rotation, frames[k].rotation, dt);
    s.accel = ImuAccel(a_local, frames[k].rotation, gravity, frame);
    trace.samples.push_back(s);
  }
  return trace;
}

}  // namespace imuplace
