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

#ifndef IMUPLACE_PIPELINE_HPP_
#define IMUPLACE_PIPELINE_HPP_

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "imuplace/config.hpp"
#include "imuplace/io.hpp"
#include "imuplace/placement.hpp"

namespace imuplace {

namespace fs = std::filesystem;

// Workspace layout written by RunPipeline.
inline constexpr const char* kPatchesFile = "patches.csv";
inline constexpr const char* kTracesDir = "traces";
inline constexpr const char* kTraceIndexFile = "traces.json";
inline constexpr const char* kUtilityFile = "utility.csv";
inline constexpr const char* kSelectionFile = "selection.json";
inline constexpr const char* kSummaryFile = "summary.txt";
inline constexpr const char* kRunConfigFile = "run_config.json";
inline constexpr const char* kManifestCopyFile = "manifest.json";
inline constexpr const char* kCacheDir = "cache";

enum class Stage { kSampling, kSynthesis, kEvaluation, kSelection, kDone };
const char* StageName(Stage stage);

// Overall progress in [0, 1]; calls are monotone in both stage and value.
using ProgressFn = std::function<void(Stage, double)>;

struct PipelineOptions {
  fs::path out_dir;
  // Defaults to out_dir/cache. Several output directories may share one.
  std::optional<fs::path> cache_dir;
  // Restrict to these activities (all when empty).
  std::vector<std::string> activities;
  ProgressFn progress;
};

struct PipelineResult {
  StoredPatches patches;
  UtilityMatrix utility;
  SelectionResult selection;
  std::vector<std::string> reused;  // cache entries that were hits
};

// Stage building blocks, shared with the CLI subcommands.
// Returns the patch table text (see FormatPatchSet).
std::string SampleStage(const MeshSequence& rest,
                        const std::vector<std::string>* vertex_labels,
                        int n_patches, std::uint64_t fps_seed);
std::vector<std::string> LoadVertexLabels(const fs::path& path,
                                          std::size_t vertex_count);
std::vector<ImuTrace> SynthesizeStage(const MeshSequence& seq,
                                      const PatchSet& patches,
                                      const GravityConfig& gravity,
                                      AccelFrame frame, int jobs);
// Noise streams of each sequence get their own seed derived from the
// configured seed and the sequence id.
std::uint64_t SequenceNoiseSeed(std::uint64_t seed, const std::string& sequence_id);
std::vector<ImuTrace> DegradeStage(const std::vector<ImuTrace>& clean,
                                   const SensorConfig& cfg,
                                   const std::string& sequence_id, int jobs);
SelectionResult RunSelection(const UtilityMatrix& matrix,
                             const SelectionRequest& request, bool exhaustive);

// Index of degraded trace files, relative to the workspace:
//   {"sequences": [{"id", "activity", "subject", "file"}]}
struct TraceIndexEntry {
  std::string id;
  std::string activity;
  std::optional<std::string> subject;
  fs::path file;
};
void WriteTraceIndex(const std::vector<TraceIndexEntry>& entries,
                     const fs::path& path);
std::vector<TraceIndexEntry> LoadTraceIndex(const fs::path& path);
// Loads every indexed trace bundle into per-patch labelled sets.
std::map<int, LabeledTraceSet> LoadIndexedTraces(
    const std::vector<TraceIndexEntry>& entries, const fs::path& base_dir);

std::string FormatSummary(const DatasetManifest& manifest,
                          const RunConfig& cfg, const PipelineResult& result);

// sample -> synthesize -> degrade -> evaluate -> select, writing the
// workspace files above. Stage outputs are cached under content hashes of
// their inputs, so a rerun only recomputes what changed. Errors carry the
// stage and item as context.
PipelineResult RunPipeline(const DatasetManifest& manifest,
                           const RunConfig& cfg,
                           const PipelineOptions& options);

}  // namespace imuplace

#endif  // IMUPLACE_PIPELINE_HPP_
