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

#ifndef IMUPLACE_FIXTURE_HPP_
#define IMUPLACE_FIXTURE_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "imuplace/mesh.hpp"

namespace imuplace {

// Coarse procedural body (y up, metres): a tube torso, a head, two arms and
// two legs. Limbs hang from a single torso vertex each, so rigid limb
// rotations about that vertex keep the mesh watertight.
struct BodyModel {
  MeshTopology topology;
  VertexPositions rest;
  std::vector<std::string> regions;  // per vertex
  std::uint32_t shoulder_left = 0, shoulder_right = 0;
  std::uint32_t hip_left = 0, hip_right = 0;
};

BodyModel BuildBodyModel();

inline constexpr const char* kArmActivity = "arm";
inline constexpr const char* kLegActivity = "leg";
inline constexpr const char* kWholeBodyActivity = "whole_body";

struct FixtureOptions {
  int sequences_per_activity = 12;
  double duration_s = 8.0;
  double frame_rate = 60.0;
  std::uint64_t seed = 7;
  // Fraction of the limb swing angle passed to the torso as counter-twist.
  double coupling = 0.005;
};

// Animates the body for one sequence. `index` selects the per-sequence
// amplitude, frequency and phase. Whole-body sequences twist the torso and
// head; the arms join in five of every six sequences, the legs in four.
MeshSequence AnimateBody(const BodyModel& body, const std::string& activity,
                         int index, const FixtureOptions& options);

// Writes rest.w2wm, regions.txt, one .w2wm per sequence and manifest.json
// into `dir`. Returns the manifest path.
std::filesystem::path WriteFixtureDataset(const std::filesystem::path& dir,
                                          const FixtureOptions& options = {});

}  // namespace imuplace

#endif  // IMUPLACE_FIXTURE_HPP_
