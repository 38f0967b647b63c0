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

#ifndef IMUPLACE_IO_HPP_
#define IMUPLACE_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "imuplace/kinematics.hpp"
#include "imuplace/placement.hpp"
#include "imuplace/sampling.hpp"
#include "imuplace/utility.hpp"

#include "json.hpp"

namespace imuplace {

namespace fs = std::filesystem;

// File helpers. Writes go to a temporary sibling and are renamed into place.
std::string ReadFileBytes(const fs::path& path);
void AtomicWrite(const fs::path& path, const std::string& bytes);

// Mesh sequence container ("W2WM", version 1, little-endian):
//   magic[4] u32 version u32 frame_count u32 vertex_count u32 face_count
//   f32 frame_rate, faces face_count*3 u32, frames frame_count*vertex_count*3
//   f32.
inline constexpr char kMeshMagic[4] = {'W', '2', 'W', 'M'};
inline constexpr std::uint32_t kMeshVersion = 1;

std::string EncodeMeshSequence(const MeshSequence& seq);
MeshSequence DecodeMeshSequence(const std::string& bytes);
void SaveMeshSequence(const MeshSequence& seq, const fs::path& path);

// Loads a binary container, or a directory of per-frame OBJ files (sorted by
// file name) that share one topology. OBJ input needs `frame_rate`; when
// given for a binary file it overrides the stored rate.
MeshSequence LoadMeshSequence(const fs::path& path,
                              std::optional<double> frame_rate = std::nullopt);

// Only the first frame of a mesh file, for rest-pose work.
MeshSequence LoadRestPose(const fs::path& path);

// "location,<activity>..." header then one row per location, 6 decimals.
std::string FormatUtilityMatrix(const UtilityMatrix& matrix);
UtilityMatrix ParseUtilityMatrix(const std::string& text);
void WriteUtilityMatrix(const UtilityMatrix& matrix, const fs::path& path);
UtilityMatrix LoadUtilityMatrix(const fs::path& path);

// Patch table with rest-pose centroids for display.
struct StoredPatches {
  PatchSet set;
  std::vector<Vec3> centroids;
};
std::string FormatPatchSet(const PatchSet& set,
                           const std::vector<Vec3>& rest_vertices);
StoredPatches ParsePatchSet(const std::string& text);
void WritePatchSet(const PatchSet& set, const std::vector<Vec3>& rest_vertices,
                   const fs::path& path);
StoredPatches LoadPatchSet(const fs::path& path);

// Trace bundle ("IMUT", version 1, little-endian): u32 count, then per
// trace i32 patch_id, f64 rate, u32 samples, samples*7 f64
// (t, ax, ay, az, gx, gy, gz).
std::string EncodeTraces(const std::vector<ImuTrace>& traces);
std::vector<ImuTrace> DecodeTraces(const std::string& bytes);
void WriteTraces(const std::vector<ImuTrace>& traces, const fs::path& path);
std::vector<ImuTrace> LoadTraces(const fs::path& path);

nlohmann::ordered_json SelectionToJson(const SelectionResult& result);
SelectionResult SelectionFromJson(const nlohmann::json& j);
// Canonical text form shared by the CLI and the service.
std::string FormatSelection(const SelectionResult& result);

}  // namespace imuplace

#endif  // IMUPLACE_IO_HPP_
