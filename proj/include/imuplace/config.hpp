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

#ifndef IMUPLACE_CONFIG_HPP_
#define IMUPLACE_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "imuplace/kinematics.hpp"
#include "imuplace/sampling.hpp"
#include "imuplace/sensor_model.hpp"
#include "imuplace/utility.hpp"

#include "json.hpp"

namespace imuplace {

namespace fs = std::filesystem;

struct ManifestEntry {
  std::string id;        // unique sequence id; defaults to the file stem
  fs::path path;         // resolved against the manifest directory
  std::string activity;
  std::optional<std::string> subject;
  std::optional<std::string> split;
};

// JSON document:
//   {"frame_rate": 100, "rest_mesh": "rest.w2wm", "vertex_labels": "regions.txt",
//    "sequences": [{"path": "...", "activity": "...", "subject": "...",
//                   "id": "...", "split": "..."}]}
struct DatasetManifest {
  std::optional<double> frame_rate;
  std::optional<fs::path> rest_mesh;
  // One region name per line, one line per vertex; used to label patches.
  std::optional<fs::path> vertex_labels;
  std::vector<ManifestEntry> sequences;

  std::vector<std::string> Activities() const;  // sorted, unique
};

DatasetManifest ParseManifest(const nlohmann::json& j, const fs::path& base_dir);
DatasetManifest LoadManifest(const fs::path& path);
// Paths are written as given (absolute after ParseManifest).
nlohmann::ordered_json ManifestToJson(const DatasetManifest& manifest);

struct RunConfig {
  int n_patches = kDefaultPatchCount;
  std::uint64_t fps_seed = kDefaultFpsSeed;
  GravityConfig gravity;
  AccelFrame accel_frame = AccelFrame::kLocal;
  SensorConfig sensor;
  // Used when sensor.misalignment is not given explicitly.
  double misalignment_deg = 1.0;
  EvalConfig eval;
  double tau = 0.9;
  std::set<int> excluded;
  std::optional<int> max_sensors;
  fs::path out_dir = "out";
  int jobs = 1;

  void Validate() const;
};

// Missing keys keep their defaults. The "seed" key, when present, seeds the
// sampling, noise and misalignment generators together.
RunConfig ParseRunConfig(const nlohmann::json& j);
RunConfig LoadRunConfig(const fs::path& path);
nlohmann::ordered_json RunConfigToJson(const RunConfig& cfg);

// Stage-relevant slices of the configuration, for cache keys.
std::string SensorConfigKey(const SensorConfig& cfg);
std::string EvalConfigKey(const EvalConfig& cfg);

}  // namespace imuplace

#endif  // IMUPLACE_CONFIG_HPP_
