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

#include "imuplace/config.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "imuplace/error.hpp"
#include "imuplace/io.hpp"

namespace imuplace {
namespace {

using nlohmann::json;

void RejectUnknownKeys(const json& j, std::initializer_list<const char*> known,
                       const std::string& where) {
  if (!j.is_object()) {
    throw Error(ErrorCode::kInvalidInput, where + " must be an object");
  }
  const std::set<std::string> allowed(known.begin(), known.end());
  for (const auto& [key, value] : j.items()) {
    if (!allowed.contains(key)) {
      throw Error(ErrorCode::kInvalidInput,
                  "unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
void Read(const json& j, const char* key, T& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

Vec3 ReadVec3(const json& j) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 3) {
    throw Error(ErrorCode::kInvalidInput, "expected a 3-vector");
  }
  return Vec3(v[0], v[1], v[2]);
}

}  // namespace

std::vector<std::string> DatasetManifest::Activities() const {
  std::set<std::string> labels;
  for (const ManifestEntry& e : sequences) labels.insert(e.activity);
  return {labels.begin(), labels.end()};
}

DatasetManifest ParseManifest(const json& j, const fs::path& base_dir) {
  try {
    RejectUnknownKeys(j, {"frame_rate", "rest_mesh", "vertex_labels", "sequences"}, "manifest");
    DatasetManifest m;
    if (j.contains("frame_rate") && !j["frame_rate"].is_null()) {
      m.frame_rate = j["frame_rate"].get<double>();
      if (!(*m.frame_rate > 0.0)) {
        throw Error(ErrorCode::kInvalidInput, "frame_rate must be positive");
      }
    }
    if (j.contains("rest_mesh") && !j["rest_mesh"].is_null()) {
      m.rest_mesh = base_dir / j["rest_mesh"].get<std::string>();
    }
    if (j.contains("vertex_labels") && !j["vertex_labels"].is_null()) {
      m.vertex_labels = base_dir / j["vertex_labels"].get<std::string>();
    }
    for (const auto* p : {&m.rest_mesh, &m.vertex_labels}) {
      std::error_code ec;
      if (*p && !fs::exists(**p, ec)) {
        throw Error(ErrorCode::kUnreadablePath, (*p)->string());
      }
    }
    std::set<std::string> ids;
    for (const json& s : j.at("sequences")) {
      RejectUnknownKeys(s, {"path", "activity", "subject", "split", "id"},
                        "sequence entry");
      ManifestEntry e;
      e.path = base_dir / s.at("path").get<std::string>();
      e.activity = s.at("activity").get<std::string>();
      if (e.activity.empty()) {
        throw Error(ErrorCode::kInvalidInput,
                    "empty activity label for " + e.path.string());
      }
      if (s.contains("subject")) e.subject = s["subject"].get<std::string>();
      if (s.contains("split")) e.split = s["split"].get<std::string>();
      e.id = s.contains("id") ? s["id"].get<std::string>()
                              : e.path.stem().string();
      if (e.id.empty() || e.id == "." || e.id == ".." ||
          e.id.find_first_of("/\\") != std::string::npos) {
        throw Error(ErrorCode::kInvalidInput,
                    "sequence id '" + e.id + "' is not a plain file name");
      }
      if (!ids.insert(e.id).second) {
        throw Error(ErrorCode::kInvalidInput, "duplicate sequence id '" +
                                                  e.id + "'");
      }
      std::error_code ec;
      if (!fs::exists(e.path, ec)) {
        throw Error(ErrorCode::kUnreadablePath, e.path.string());
      }
      m.sequences.push_back(std::move(e));
    }
    if (m.sequences.empty()) {
      throw Error(ErrorCode::kInvalidInput, "manifest lists no sequences");
    }
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidInput,
                std::string("manifest: ") + e.what());
  }
}

nlohmann::ordered_json ManifestToJson(const DatasetManifest& manifest) {
  nlohmann::ordered_json j;
  if (manifest.frame_rate) j["frame_rate"] = *manifest.frame_rate;
  if (manifest.rest_mesh) j["rest_mesh"] = manifest.rest_mesh->string();
  if (manifest.vertex_labels) {
    j["vertex_labels"] = manifest.vertex_labels->string();
  }
  auto seqs = nlohmann::ordered_json::array();
  for (const ManifestEntry& e : manifest.sequences) {
    nlohmann::ordered_json s;
    s["id"] = e.id;
    s["path"] = e.path.string();
    s["activity"] = e.activity;
    if (e.subject) s["subject"] = *e.subject;
    if (e.split) s["split"] = *e.split;
    seqs.push_back(std::move(s));
  }
  j["sequences"] = std::move(seqs);
  return j;
}

DatasetManifest LoadManifest(const fs::path& path) {
  const std::string text = ReadFileBytes(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidInput,
                path.string() + ": " + e.what());
  }
  return ParseManifest(j, fs::absolute(path).parent_path());
}

void RunConfig::Validate() const {
  if (n_patches < 1) {
    throw Error(ErrorCode::kBadCount, "n_patches must be >= 1");
  }
  if (!gravity.g.allFinite()) {
    throw Error(ErrorCode::kInvalidInput, "gravity must be finite");
  }
  sensor.Validate();
  if (!(eval.window_s > 0.0) || !(eval.overlap >= 0.0 && eval.overlap < 1.0)) {
    throw Error(ErrorCode::kInvalidInput, "bad window/overlap");
  }
  if (eval.folds < 2) {
    throw Error(ErrorCode::kInvalidInput, "folds must be >= 2");
  }
  if (!(tau >= 0.0 && tau <= 1.0)) {
    throw Error(ErrorCode::kInvalidInput, "tau must lie in [0, 1]");
  }
  if (jobs < 1) {
    throw Error(ErrorCode::kInvalidInput, "jobs must be >= 1");
  }
}

RunConfig ParseRunConfig(const json& j) {
  RunConfig cfg;
  try {
    RejectUnknownKeys(j,
                      {"n_patches", "fps_seed", "seed", "gravity",
                       "accel_frame", "sensor", "eval", "tau", "excluded",
                       "max_sensors", "out_dir", "jobs"},
                      "config");
    if (j.contains("seed")) {
      const auto seed = j["seed"].get<std::uint64_t>();
      cfg.fps_seed = seed;
      cfg.sensor.rng_seed = seed;
    }
    Read(j, "n_patches", cfg.n_patches);
    Read(j, "fps_seed", cfg.fps_seed);
    if (j.contains("gravity")) cfg.gravity.g = ReadVec3(j["gravity"]);
    if (j.contains("accel_frame")) {
      const auto frame = j["accel_frame"].get<std::string>();
      if (frame == "local") {
        cfg.accel_frame = AccelFrame::kLocal;
      } else if (frame == "literal") {
        cfg.accel_frame = AccelFrame::kLiteral;
      } else {
        throw Error(ErrorCode::kInvalidInput,
                    "accel_frame must be 'local' or 'literal'");
      }
    }

    std::optional<std::uint64_t> misalignment_seed;
    bool explicit_misalignment = false;
    if (j.contains("sensor")) {
      const json& s = j["sensor"];
      RejectUnknownKeys(s,
                        {"output_rate", "filter_cutoff", "filter_order",
                         "accel_noise_std", "gyro_noise_std",
                         "accel_bias_walk_std", "gyro_bias_walk_std",
                         "misalignment_deg", "misalignment_seed",
                         "misalignment", "rng_seed"},
                        "sensor");
      Read(s, "output_rate", cfg.sensor.output_rate);
      if (s.contains("filter_cutoff")) {
        if (s["filter_cutoff"].is_null()) {
          cfg.sensor.filter_cutoff.reset();
        } else {
          cfg.sensor.filter_cutoff = s["filter_cutoff"].get<double>();
        }
      }
      Read(s, "filter_order", cfg.sensor.filter_order);
      Read(s, "accel_noise_std", cfg.sensor.accel_noise_std);
      Read(s, "gyro_noise_std", cfg.sensor.gyro_noise_std);
      Read(s, "accel_bias_walk_std", cfg.sensor.accel_bias_walk_std);
      Read(s, "gyro_bias_walk_std", cfg.sensor.gyro_bias_walk_std);
      Read(s, "misalignment_deg", cfg.misalignment_deg);
      Read(s, "rng_seed", cfg.sensor.rng_seed);
      if (s.contains("misalignment_seed")) {
        misalignment_seed = s["misalignment_seed"].get<std::uint64_t>();
      }
      if (s.contains("misalignment")) {
        const auto rows = s["misalignment"].get<std::vector<std::vector<double>>>();
        if (rows.size() != 3) {
          throw Error(ErrorCode::kInvalidInput, "misalignment must be 3x3");
        }
        for (int r = 0; r < 3; ++r) {
          if (rows[r].size() != 3) {
            throw Error(ErrorCode::kInvalidInput, "misalignment must be 3x3");
          }
          for (int c = 0; c < 3; ++c) cfg.sensor.misalignment(r, c) = rows[r][c];
        }
        explicit_misalignment = true;
      }
    }
    if (!explicit_misalignment) {
      cfg.sensor.misalignment =
          cfg.misalignment_deg == 0.0
              ? Mat3::Identity()
              : RandomMisalignment(cfg.misalignment_deg,
                                   misalignment_seed.value_or(
                                       cfg.sensor.rng_seed));
    }

    if (j.contains("eval")) {
      const json& e = j["eval"];
      RejectUnknownKeys(e,
                        {"window_s", "overlap", "folds", "spectral_cutoff_hz",
                         "l2", "iterations", "learning_rate"},
                        "eval");
      Read(e, "window_s", cfg.eval.window_s);
      Read(e, "overlap", cfg.eval.overlap);
      Read(e, "folds", cfg.eval.folds);
      Read(e, "spectral_cutoff_hz", cfg.eval.features.spectral_cutoff_hz);
      Read(e, "l2", cfg.eval.train.l2);
      Read(e, "iterations", cfg.eval.train.iterations);
      Read(e, "learning_rate", cfg.eval.train.learning_rate);
    }
    Read(j, "tau", cfg.tau);
    if (j.contains("excluded")) {
      const auto ids = j["excluded"].get<std::vector<int>>();
      cfg.excluded = std::set<int>(ids.begin(), ids.end());
    }
    if (j.contains("max_sensors") && !j["max_sensors"].is_null()) {
      cfg.max_sensors = j["max_sensors"].get<int>();
    }
    if (j.contains("out_dir")) cfg.out_dir = j["out_dir"].get<std::string>();
    Read(j, "jobs", cfg.jobs);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidInput, std::string("config: ") + e.what());
  }
  cfg.Validate();
  return cfg;
}

RunConfig LoadRunConfig(const fs::path& path) {
  const std::string text = ReadFileBytes(path);
  try {
    return ParseRunConfig(json::parse(text));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidInput, path.string() + ": " + e.what());
  }
}

nlohmann::ordered_json RunConfigToJson(const RunConfig& cfg) {
  nlohmann::ordered_json j;
  j["n_patches"] = cfg.n_patches;
  j["fps_seed"] = cfg.fps_seed;
  j["gravity"] = {cfg.gravity.g.x(), cfg.gravity.g.y(), cfg.gravity.g.z()};
  j["accel_frame"] = cfg.accel_frame == AccelFrame::kLocal ? "local" : "literal";
  nlohmann::ordered_json s;
  s["output_rate"] = cfg.sensor.output_rate;
  if (cfg.sensor.filter_cutoff) {
    s["filter_cutoff"] = *cfg.sensor.filter_cutoff;
  } else {
    s["filter_cutoff"] = nullptr;
  }
  s["filter_order"] = cfg.sensor.filter_order;
  s["accel_noise_std"] = cfg.sensor.accel_noise_std;
  s["gyro_noise_std"] = cfg.sensor.gyro_noise_std;
  s["accel_bias_walk_std"] = cfg.sensor.accel_bias_walk_std;
  s["gyro_bias_walk_std"] = cfg.sensor.gyro_bias_walk_std;
  s["rng_seed"] = cfg.sensor.rng_seed;
  auto rows = nlohmann::ordered_json::array();
  for (int r = 0; r < 3; ++r) {
    rows.push_back({cfg.sensor.misalignment(r, 0), cfg.sensor.misalignment(r, 1),
                    cfg.sensor.misalignment(r, 2)});
  }
  s["misalignment"] = rows;
  j["sensor"] = s;
  nlohmann::ordered_json e;
  e["window_s"] = cfg.eval.window_s;
  e["overlap"] = cfg.eval.overlap;
  e["folds"] = cfg.eval.folds;
  e["spectral_cutoff_hz"] = cfg.eval.features.spectral_cutoff_hz;
  e["l2"] = cfg.eval.train.l2;
  e["iterations"] = cfg.eval.train.iterations;
  e["learning_rate"] = cfg.eval.train.learning_rate;
  j["eval"] = e;
  j["tau"] = cfg.tau;
  j["excluded"] = std::vector<int>(cfg.excluded.begin(), cfg.excluded.end());
  if (cfg.max_sensors) {
    j["max_sensors"] = *cfg.max_sensors;
  } else {
    j["max_sensors"] = nullptr;
  }
  j["out_dir"] = cfg.out_dir.string();
  j["jobs"] = cfg.jobs;
  return j;
}

std::string SensorConfigKey(const SensorConfig& cfg) {
  nlohmann::ordered_json j;
  j["output_rate"] = cfg.output_rate;
  j["filter_cutoff"] = cfg.filter_cutoff ? *cfg.filter_cutoff : -1.0;
  j["filter_order"] = cfg.filter_order;
  j["noise"] = {cfg.accel_noise_std, cfg.gyro_noise_std,
                cfg.accel_bias_walk_std, cfg.gyro_bias_walk_std};
  j["m"] = std::vector<double>(cfg.misalignment.data(),
                               cfg.misalignment.data() + 9);
  j["seed"] = cfg.rng_seed;
  return j.dump();
}

std::string EvalConfigKey(const EvalConfig& cfg) {
  nlohmann::ordered_json j;
  j["w"] = cfg.window_s;
  j["o"] = cfg.overlap;
  j["k"] = cfg.folds;
  j["sc"] = cfg.features.spectral_cutoff_hz;
  j["l2"] = cfg.train.l2;
  j["it"] = cfg.train.iterations;
  j["lr"] = cfg.train.learning_rate;
  return j.dump();
}

}  // namespace imuplace
