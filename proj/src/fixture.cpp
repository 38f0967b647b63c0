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

#include "imuplace/fixture.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Geometry>

#include "imuplace/error.hpp"
#include "imuplace/hash.hpp"
#include "imuplace/io.hpp"

#include "json.hpp"

namespace imuplace {
namespace {

namespace fs = std::filesystem;
constexpr double kPi = std::numbers::pi;

constexpr double kTorsoBottom = 0.9;
constexpr double kTorsoTop = 1.5;

class Builder {
 public:
  explicit Builder(BodyModel& body) : body_(body) {}

  std::uint32_t Vertex(const Vec3& p, const std::string& region) {
    body_.rest.push_back(p);
    body_.regions.push_back(region);
    return static_cast<std::uint32_t>(body_.rest.size() - 1);
  }

  std::vector<std::uint32_t> Ring(double cx, double cz, double y, double r,
                                  int segments, const std::string& region) {
    std::vector<std::uint32_t> ring;
    for (int j = 0; j < segments; ++j) {
      const double a = 2.0 * kPi * j / segments;
      ring.push_back(
          Vertex(Vec3(cx + r * std::cos(a), y, cz + r * std::sin(a)), region));
    }
    return ring;
  }

  void Triangle(std::uint32_t a, std::uint32_t b, std::uint32_t c) {
    body_.topology.faces.push_back({a, b, c});
  }

  void Bridge(const std::vector<std::uint32_t>& lo,
              const std::vector<std::uint32_t>& hi) {
    const std::size_t n = lo.size();
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t k = (j + 1) % n;
      Triangle(lo[j], lo[k], hi[j]);
      Triangle(lo[k], hi[k], hi[j]);
    }
  }

  void Fan(const std::vector<std::uint32_t>& ring, std::uint32_t apex,
           bool flip) {
    const std::size_t n = ring.size();
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t k = (j + 1) % n;
      if (flip) {
        Triangle(ring[k], ring[j], apex);
      } else {
        Triangle(ring[j], ring[k], apex);
      }
    }
  }

  // A hanging limb: rings from y_top down to y_bottom, a proximal fan to the
  // attachment vertex and a distal apex.
  void Limb(std::uint32_t attach, double cx, double y_top, double y_bottom,
            double radius, const std::string& region) {
    constexpr int kRings = 8;
    constexpr int kSegments = 6;
    std::vector<std::vector<std::uint32_t>> rings;
    for (int i = 0; i < kRings; ++i) {
      const double y = y_top + (y_bottom - y_top) * i / (kRings - 1);
      rings.push_back(Ring(cx, 0.0, y, radius, kSegments, region));
    }
    Fan(rings.front(), attach, false);
    for (int i = 0; i + 1 < kRings; ++i) Bridge(rings[i + 1], rings[i]);
    const std::uint32_t tip = Vertex(Vec3(cx, y_bottom - 0.06, 0.0), region);
    Fan(rings.back(), tip, true);
  }

 private:
  BodyModel& body_;
};

// Uniform in [0, 1) from the top 53 bits; avoids the implementation-defined
// algorithms of <random> distributions so fixtures match across toolchains.
double Unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Vec3 RotateX(const Vec3& p, const Vec3& pivot, double angle) {
  const Eigen::AngleAxisd rot(angle, Vec3::UnitX());
  return pivot + rot * (p - pivot);
}

Vec3 TwistY(const Vec3& p, double angle) {
  const Eigen::AngleAxisd rot(angle, Vec3::UnitY());
  return rot * p;
}

}  // namespace

BodyModel BuildBodyModel() {
  BodyModel body;
  Builder b(body);

  std::vector<std::vector<std::uint32_t>> torso;
  for (int i = 0; i <= 6; ++i) {
    torso.push_back(b.Ring(0.0, 0.0, kTorsoBottom + 0.1 * i, 0.15, 10, "torso"));
  }
  for (std::size_t i = 0; i + 1 < torso.size(); ++i) {
    b.Bridge(torso[i], torso[i + 1]);
  }
  const std::uint32_t neck = b.Vertex(Vec3(0.0, 1.55, 0.0), "torso");
  const std::uint32_t pelvis = b.Vertex(Vec3(0.0, 0.85, 0.0), "torso");
  b.Fan(torso.back(), neck, false);
  b.Fan(torso.front(), pelvis, true);

  const std::vector<std::uint32_t> head_lo =
      b.Ring(0.0, 0.0, 1.62, 0.08, 8, "head");
  const std::vector<std::uint32_t> head_mid =
      b.Ring(0.0, 0.0, 1.72, 0.09, 8, "head");
  const std::vector<std::uint32_t> head_hi =
      b.Ring(0.0, 0.0, 1.82, 0.07, 8, "head");
  b.Fan(head_lo, neck, true);
  b.Bridge(head_lo, head_mid);
  b.Bridge(head_mid, head_hi);
  b.Fan(head_hi, b.Vertex(Vec3(0.0, 1.9, 0.0), "head"), false);

  // Ring vertex 0 sits at +x, vertex 5 at -x.
  body.shoulder_right = torso.back()[0];
  body.shoulder_left = torso.back()[5];
  body.hip_right = torso.front()[0];
  body.hip_left = torso.front()[5];
  b.Limb(body.shoulder_right, 0.22, 1.42, 0.86, 0.045, "arm_right");
  b.Limb(body.shoulder_left, -0.22, 1.42, 0.86, 0.045, "arm_left");
  b.Limb(body.hip_right, 0.10, 0.82, 0.08, 0.06, "leg_right");
  b.Limb(body.hip_left, -0.10, 0.82, 0.08, 0.06, "leg_left");

  body.topology.vertex_count = static_cast<std::uint32_t>(body.rest.size());
  body.topology.Validate();
  return body;
}

MeshSequence AnimateBody(const BodyModel& body, const std::string& activity,
                         int index, const FixtureOptions& options) {
  if (activity != kArmActivity && activity != kLegActivity &&
      activity != kWholeBodyActivity) {
    throw Error(ErrorCode::kUnknownActivity, activity);
  }
  if (!(options.frame_rate > 0.0) || !(options.duration_s > 0.0)) {
    throw Error(ErrorCode::kInvalidInput, "fixture rate/duration must be > 0");
  }
  std::mt19937_64 rng(Hasher()
                          .Add(options.seed)
                          .Add(activity)
                          .Add(static_cast<std::uint64_t>(index))
                          .value());
  const double amp_jitter = 0.85 + 0.3 * Unit(rng);
  const double freq_jitter = 0.85 + 0.3 * Unit(rng);
  const double phase = 2.0 * kPi * Unit(rng);

  // Swing angles of each limb and the torso twist amplitude, as functions
  // of time.
  double arm_amp = 0.0, arm_freq = 0.0, leg_amp = 0.0, leg_freq = 0.0;
  double twist_amp = 0.0, twist_freq = 0.0;
  double arm_sign = -1.0, leg_sign = -1.0;  // left limb relative to right
  if (activity == kArmActivity) {
    arm_amp = 0.8 * amp_jitter;
    arm_freq = 1.0 * freq_jitter;
  } else if (activity == kLegActivity) {
    leg_amp = 0.5 * amp_jitter;
    leg_freq = 1.0 * freq_jitter;
  } else {
    twist_amp = 0.35 * amp_jitter;
    twist_freq = 1.5 * freq_jitter;
    // Limb involvement cycles through arms, both, both, legs, arms, both.
    constexpr bool kArms[6] = {true, true, true, false, true, true};
    constexpr bool kLegs[6] = {false, true, true, true, false, true};
    if (kArms[index % 6]) {
      arm_amp = 0.2 * amp_jitter;
      arm_freq = 2.5 * freq_jitter;
      arm_sign = 1.0;
    }
    if (kLegs[index % 6]) {
      leg_amp = 0.15 * amp_jitter;
      leg_freq = 2.5 * freq_jitter;
      leg_sign = 1.0;
    }
  }

  const auto frames =
      static_cast<std::size_t>(std::llround(options.duration_s * options.frame_rate));
  MeshSequence seq;
  seq.topology = body.topology;
  seq.frame_rate = options.frame_rate;
  seq.frames.resize(frames);

  const Vec3 shoulder_r = body.rest[body.shoulder_right];
  const Vec3 shoulder_l = body.rest[body.shoulder_left];
  const Vec3 hip_r = body.rest[body.hip_right];
  const Vec3 hip_l = body.rest[body.hip_left];

  // Limbs hang from these, so they never move with the torso.
  std::vector<bool> pivot(body.rest.size(), false);
  for (std::uint32_t v : {body.shoulder_right, body.shoulder_left,
                          body.hip_right, body.hip_left}) {
    pivot[v] = true;
  }

  for (std::size_t f = 0; f < frames; ++f) {
    const double t = static_cast<double>(f) / options.frame_rate;
    const double arm = arm_amp * std::sin(2.0 * kPi * arm_freq * t + phase);
    const double leg = leg_amp * std::sin(2.0 * kPi * leg_freq * t + phase);
    const double twist =
        twist_amp * std::sin(2.0 * kPi * twist_freq * t + phase);
    VertexPositions& out = seq.frames[f];
    out.resize(body.rest.size());
    for (std::size_t v = 0; v < body.rest.size(); ++v) {
      const Vec3& p = body.rest[v];
      const std::string& region = body.regions[v];
      if (region == "arm_right") {
        out[v] = RotateX(p, shoulder_r, arm);
      } else if (region == "arm_left") {
        out[v] = RotateX(p, shoulder_l, arm_sign * arm);
      } else if (region == "leg_right") {
        out[v] = RotateX(p, hip_r, leg);
      } else if (region == "leg_left") {
        out[v] = RotateX(p, hip_l, leg_sign * leg);
      } else if (region == "torso" && !pivot[v]) {
        // Strongest mid-torso, half strength at the shoulder and hip rings.
        // Limb swings leak in as a faint counter-twist that fades away from
        // the limb roots.
        const double s = std::clamp(
            (p.y() - kTorsoBottom) / (kTorsoTop - kTorsoBottom), 0.0, 1.0);
        out[v] = TwistY(p, twist * (0.5 + 0.5 * std::sin(kPi * s)) -
                               options.coupling * (arm * s + leg * (1.0 - s)));
      } else if (region == "head") {
        out[v] = TwistY(p, twist - options.coupling * arm);
      } else {
        out[v] = p;
      }
    }
  }
  seq.Validate();
  return seq;
}

fs::path WriteFixtureDataset(const fs::path& dir, const FixtureOptions& options) {
  if (options.sequences_per_activity < 1) {
    throw Error(ErrorCode::kBadCount, "sequences_per_activity must be >= 1");
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIoFailure, dir.string() + ": " + ec.message());

  const BodyModel body = BuildBodyModel();
  MeshSequence rest;
  rest.topology = body.topology;
  rest.frame_rate = options.frame_rate;
  rest.frames = {body.rest};
  AtomicWrite(dir / "rest.w2wm", EncodeMeshSequence(rest));

  std::string regions;
  for (const std::string& r : body.regions) regions += r + "\n";
  AtomicWrite(dir / "regions.txt", regions);

  nlohmann::ordered_json manifest;
  manifest["frame_rate"] = options.frame_rate;
  manifest["rest_mesh"] = "rest.w2wm";
  manifest["vertex_labels"] = "regions.txt";
  auto seqs = nlohmann::ordered_json::array();
  for (const char* activity :
       {kArmActivity, kLegActivity, kWholeBodyActivity}) {
    for (int i = 0; i < options.sequences_per_activity; ++i) {
      const std::string id = std::string(activity) + "_" + std::to_string(i);
      SaveMeshSequence(AnimateBody(body, activity, i, options),
                       dir / (id + ".w2wm"));
      nlohmann::ordered_json s;
      s["id"] = id;
      s["path"] = id + ".w2wm";
      s["activity"] = activity;
      s["subject"] = "s" + std::to_string(i);
      seqs.push_back(std::move(s));
    }
  }
  manifest["sequences"] = std::move(seqs);
  AtomicWrite(dir / "manifest.json", manifest.dump(2) + "\n");
  return dir / "manifest.json";
}

}  // namespace imuplace
