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

#include "imuplace/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>

#include "imuplace/error.hpp"
#include "imuplace/hash.hpp"
#include "imuplace/parallel.hpp"

namespace imuplace {
namespace {

// Content hash of a mesh input: file bytes, or the sorted OBJ frames of a
// directory.
std::string HashPathContent(const fs::path& path) {
  std::error_code ec;
  Hasher h;
  if (fs::is_directory(path, ec)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(path)) {
      if (entry.is_regular_file()) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const fs::path& f : files) {
      h.Add(f.filename().string());
      h.Add(ReadFileBytes(f));
    }
  } else {
    h.Add(ReadFileBytes(path));
  }
  return h.hex();
}

std::string FormatFixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

class CacheStore {
 public:
  CacheStore(fs::path dir, std::vector<std::string>* reused)
      : dir_(std::move(dir)), reused_(reused) {}

  fs::path PathFor(const std::string& stage, const std::string& key,
                   const char* ext) const {
    return dir_ / (stage + "-" + key + ext);
  }
  bool Has(const fs::path& path) const {
    std::error_code ec;
    return fs::is_regular_file(path, ec);
  }

  template <typename Fn>
  std::string Get(const fs::path& path, Fn&& compute) {
    if (Has(path)) {
      reused_->push_back(path.filename().string());
      return ReadFileBytes(path);
    }
    std::string bytes = compute();
    AtomicWrite(path, bytes);
    return bytes;
  }

 private:
  fs::path dir_;
  std::vector<std::string>* reused_;
};

class Progress {
 public:
  explicit Progress(const ProgressFn& fn) : fn_(fn) {}
  void Report(Stage stage, double value) {
    value = std::clamp(value, last_, 1.0);
    last_ = value;
    if (fn_) fn_(stage, value);
  }

 private:
  const ProgressFn& fn_;
  double last_ = 0.0;
};

template <typename Fn>
auto WithStage(const std::string& context, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    throw e.WithContext(context);
  }
}

}  // namespace

const char* StageName(Stage stage) {
  switch (stage) {
    case Stage::kSampling: return "sampling";
    case Stage::kSynthesis: return "synthesis";
    case Stage::kEvaluation: return "evaluation";
    case Stage::kSelection: return "selection";
    case Stage::kDone: return "done";
  }
  return "unknown";
}

std::vector<std::string> LoadVertexLabels(const fs::path& path,
                                          std::size_t vertex_count) {
  std::istringstream in(ReadFileBytes(path));
  std::vector<std::string> labels;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    labels.push_back(line);
  }
  while (!labels.empty() && labels.back().empty()) labels.pop_back();
  if (labels.size() != vertex_count) {
    throw Error(ErrorCode::kInvalidInput,
                path.string() + " has " + std::to_string(labels.size()) +
                    " labels for " + std::to_string(vertex_count) +
                    " vertices");
  }
  return labels;
}

std::string SampleStage(const MeshSequence& rest,
                        const std::vector<std::string>* vertex_labels,
                        int n_patches, std::uint64_t fps_seed) {
  PatchSet set = SamplePatches(rest.topology, rest.frames.at(0), n_patches,
                               fps_seed);
  if (vertex_labels) {
    for (std::size_t i = 0; i < set.patches.size(); ++i) {
      set.patches[i].label =
          MajorityLabel(*vertex_labels, set.patches[i], set.centers[i]);
    }
  }
  return FormatPatchSet(set, rest.frames[0]);
}

std::vector<ImuTrace> SynthesizeStage(const MeshSequence& seq,
                                      const PatchSet& patches,
                                      const GravityConfig& gravity,
                                      AccelFrame frame, int jobs) {
  seq.Validate();
  std::vector<ImuTrace> traces(patches.patches.size());
  ParallelFor(traces.size(), jobs, [&](std::size_t i) {
    const SurfacePatch& patch = patches.patches[i];
    try {
      traces[i] = SynthesizeImuUnchecked(seq, patch, gravity, frame);
    } catch (const Error& e) {
      throw e.WithContext("patch " + std::to_string(patch.id));
    }
  });
  return traces;
}

std::uint64_t SequenceNoiseSeed(std::uint64_t seed,
                                const std::string& sequence_id) {
  return Hasher().Add("noise").Add(seed).Add(sequence_id).value();
}

std::vector<ImuTrace> DegradeStage(const std::vector<ImuTrace>& clean,
                                   const SensorConfig& cfg,
                                   const std::string& sequence_id, int jobs) {
  SensorConfig local = cfg;
  local.rng_seed = SequenceNoiseSeed(cfg.rng_seed, sequence_id);
  local.Validate();
  std::vector<ImuTrace> out(clean.size());
  ParallelFor(out.size(), jobs, [&](std::size_t i) {
    try {
      out[i] = ApplySensorModel(clean[i], local);
    } catch (const Error& e) {
      throw e.WithContext("patch " + std::to_string(clean[i].patch_id));
    }
  });
  return out;
}

SelectionResult RunSelection(const UtilityMatrix& matrix,
                             const SelectionRequest& request,
                             bool exhaustive) {
  return exhaustive ? ExhaustiveSelect(matrix, request)
                    : GreedySelect(matrix, request);
}

void WriteTraceIndex(const std::vector<TraceIndexEntry>& entries,
                     const fs::path& path) {
  nlohmann::ordered_json j;
  auto seqs = nlohmann::ordered_json::array();
  for (const TraceIndexEntry& e : entries) {
    nlohmann::ordered_json s;
    s["id"] = e.id;
    s["activity"] = e.activity;
    if (e.subject) {
      s["subject"] = *e.subject;
    } else {
      s["subject"] = nullptr;
    }
    s["file"] = e.file.generic_string();
    seqs.push_back(std::move(s));
  }
  j["sequences"] = std::move(seqs);
  AtomicWrite(path, j.dump(2) + "\n");
}

std::vector<TraceIndexEntry> LoadTraceIndex(const fs::path& path) {
  try {
    const auto j = nlohmann::json::parse(ReadFileBytes(path));
    std::vector<TraceIndexEntry> entries;
    for (const auto& s : j.at("sequences")) {
      TraceIndexEntry e;
      e.id = s.at("id").get<std::string>();
      e.activity = s.at("activity").get<std::string>();
      if (s.contains("subject") && !s["subject"].is_null()) {
        e.subject = s["subject"].get<std::string>();
      }
      e.file = s.at("file").get<std::string>();
      entries.push_back(std::move(e));
    }
    return entries;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidInput, path.string() + ": " + e.what());
  }
}

std::map<int, LabeledTraceSet> LoadIndexedTraces(
    const std::vector<TraceIndexEntry>& entries, const fs::path& base_dir) {
  std::map<int, LabeledTraceSet> data;
  for (const TraceIndexEntry& e : entries) {
    for (ImuTrace& t : LoadTraces(base_dir / e.file)) {
      const int id = t.patch_id;
      data[id].push_back({std::move(t), e.activity, e.subject, e.id});
    }
  }
  return data;
}

std::string FormatSummary(const DatasetManifest& manifest, const RunConfig& cfg,
                          const PipelineResult& result) {
  const UtilityMatrix& u = result.utility;
  std::map<int, std::string> labels;
  for (const SurfacePatch& p : result.patches.set.patches) {
    labels[p.id] = p.label.value_or("");
  }
  auto describe = [&](int id) {
    const std::string& label = labels[id];
    return std::to_string(id) + (label.empty() ? "" : " [" + label + "]");
  };

  std::string out;
  out += "patches: " + std::to_string(result.patches.set.patches.size()) +
         " (fps seed " + std::to_string(result.patches.set.seed) + ")\n";
  out += "sequences: " + std::to_string(manifest.sequences.size()) + "\n";
  out += "activities:";
  for (const std::string& a : u.activities()) out += " " + a;
  out += "\n";
  const SingleLocation best = BestSingleLocation(u, cfg.excluded);
  out += "best single location: " + describe(best.location) + " mean F1 " +
         FormatFixed(best.mean_f1, 4) + "\n";
  out += "top locations per activity:\n";
  for (const std::string& a : u.activities()) {
    const LocationRanking ranking = RankLocations(u, a);
    const std::size_t col = *u.ColumnOf(a);
    out += "  " + a + ":";
    for (std::size_t i = 0; i < std::min<std::size_t>(5, ranking.order.size());
         ++i) {
      const int id = ranking.order[i];
      out += " " + describe(id) + "=" + FormatFixed(u.at(*u.RowOf(id), col), 3);
    }
    out += "\n";
  }
  const SelectionResult& s = result.selection;
  out += "selection (tau " + FormatFixed(s.tau, 2) + "): " +
         (s.feasible ? "feasible" : "infeasible") + ", coverage " +
         FormatFixed(s.coverage, 4) + ", " + std::to_string(s.selected.size()) +
         " sensor(s)\n";
  for (const ActivityBest& b : s.per_activity_best) {
    out += "  " + b.activity + " -> " +
           (b.location ? describe(*b.location) : std::string("none")) +
           " F1 " + FormatFixed(b.f1, 3) + "\n";
  }
  return out;
}

PipelineResult RunPipeline(const DatasetManifest& manifest_in,
                           const RunConfig& cfg,
                           const PipelineOptions& options) {
  cfg.Validate();
  if (options.out_dir.empty()) {
    throw Error(ErrorCode::kInvalidInput, "no output directory");
  }
  DatasetManifest manifest = manifest_in;
  if (!options.activities.empty()) {
    const std::vector<std::string> known = manifest.Activities();
    for (const std::string& a : options.activities) {
      if (std::find(known.begin(), known.end(), a) == known.end()) {
        throw Error(ErrorCode::kUnknownActivity, a);
      }
    }
    std::erase_if(manifest.sequences, [&](const ManifestEntry& e) {
      return std::find(options.activities.begin(), options.activities.end(),
                       e.activity) == options.activities.end();
    });
  }
  if (manifest.sequences.empty()) {
    throw Error(ErrorCode::kInvalidInput, "manifest lists no sequences");
  }

  const fs::path out = options.out_dir;
  const fs::path cache_dir = options.cache_dir.value_or(out / kCacheDir);
  std::error_code ec;
  for (const fs::path& d : {out, out / kTracesDir, cache_dir}) {
    fs::create_directories(d, ec);
    if (ec) throw Error(ErrorCode::kIoFailure, d.string() + ": " + ec.message());
  }

  PipelineResult result;
  CacheStore cache(cache_dir, &result.reused);
  Progress progress(options.progress);
  progress.Report(Stage::kSampling, 0.0);

  // Sampling.
  const fs::path rest_path =
      manifest.rest_mesh.value_or(manifest.sequences.front().path);
  const std::string sample_key = WithStage("sampling", [&] {
    Hasher h;
    h.Add("sample-v1").Add(HashPathContent(rest_path));
    h.Add(manifest.vertex_labels ? HashPathContent(*manifest.vertex_labels)
                                 : std::string());
    h.Add(static_cast<std::uint64_t>(cfg.n_patches)).Add(cfg.fps_seed);
    return h.hex();
  });
  const std::string patch_text = WithStage("sampling", [&] {
    return cache.Get(cache.PathFor("sample", sample_key, ".csv"), [&] {
      const MeshSequence rest = LoadRestPose(rest_path);
      std::optional<std::vector<std::string>> labels;
      if (manifest.vertex_labels) {
        labels = LoadVertexLabels(*manifest.vertex_labels,
                                  rest.topology.vertex_count);
      }
      return SampleStage(rest, labels ? &*labels : nullptr, cfg.n_patches,
                         cfg.fps_seed);
    });
  });
  result.patches = ParsePatchSet(patch_text);
  AtomicWrite(out / kPatchesFile, patch_text);
  progress.Report(Stage::kSynthesis, 0.1);

  // Synthesis and sensor model, one sequence at a time to bound memory.
  std::map<int, LabeledTraceSet> data;
  std::vector<TraceIndexEntry> index;
  Hasher eval_hasher;
  eval_hasher.Add("eval-v1").Add(EvalConfigKey(cfg.eval));
  const std::size_t n_seq = manifest.sequences.size();
  for (std::size_t i = 0; i < n_seq; ++i) {
    const ManifestEntry& entry = manifest.sequences[i];
    const std::string context = "synthesis: sequence " + entry.id;
    const std::string degraded = WithStage(context, [&] {
      Hasher sh;
      sh.Add("synth-v1").Add(HashPathContent(entry.path)).Add(sample_key);
      sh.Add(manifest.frame_rate ? FormatFixed(*manifest.frame_rate, 9) : "-");
      for (int k = 0; k < 3; ++k) sh.Add(FormatFixed(cfg.gravity.g[k], 9));
      sh.Add(cfg.accel_frame == AccelFrame::kLocal ? "local" : "literal");
      const std::string synth_key = sh.hex();
      const std::string degrade_key = Hasher()
                                          .Add("degrade-v1")
                                          .Add(synth_key)
                                          .Add(SensorConfigKey(cfg.sensor))
                                          .Add(entry.id)
                                          .hex();
      eval_hasher.Add(entry.id).Add(entry.activity);
      eval_hasher.Add(entry.subject.value_or("")).Add(degrade_key);
      return cache.Get(cache.PathFor("degrade", degrade_key, ".imut"), [&] {
        const std::string clean =
            cache.Get(cache.PathFor("synth", synth_key, ".imut"), [&] {
              const MeshSequence seq =
                  LoadMeshSequence(entry.path, manifest.frame_rate);
              return EncodeTraces(SynthesizeStage(seq, result.patches.set,
                                                  cfg.gravity, cfg.accel_frame,
                                                  cfg.jobs));
            });
        return EncodeTraces(
            DegradeStage(DecodeTraces(clean), cfg.sensor, entry.id, cfg.jobs));
      });
    });
    const fs::path rel = fs::path(kTracesDir) / (entry.id + ".imut");
    AtomicWrite(out / rel, degraded);
    index.push_back({entry.id, entry.activity, entry.subject, rel});
    for (ImuTrace& t : DecodeTraces(degraded)) {
      const int id = t.patch_id;
      data[id].push_back({std::move(t), entry.activity, entry.subject, entry.id});
    }
    progress.Report(Stage::kSynthesis,
                    0.1 + 0.6 * static_cast<double>(i + 1) / n_seq);
  }
  WriteTraceIndex(index, out / kTraceIndexFile);

  // Evaluation.
  progress.Report(Stage::kEvaluation, 0.7);
  const std::string utility_text = WithStage("evaluation", [&] {
    return cache.Get(cache.PathFor("eval", eval_hasher.hex(), ".csv"), [&] {
      return FormatUtilityMatrix(
          ComputeUtilityMatrix(data, result.patches.set, cfg.eval, cfg.jobs));
    });
  });
  data.clear();
  result.utility = ParseUtilityMatrix(utility_text);
  AtomicWrite(out / kUtilityFile, utility_text);
  progress.Report(Stage::kSelection, 0.95);

  // Selection. Cheap, so never cached.
  result.selection = WithStage("selection", [&] {
    SelectionRequest request;
    request.tau = cfg.tau;
    request.excluded = cfg.excluded;
    request.max_sensors = cfg.max_sensors;
    return RunSelection(result.utility, request, false);
  });
  AtomicWrite(out / kSelectionFile, FormatSelection(result.selection));
  AtomicWrite(out / kSummaryFile, FormatSummary(manifest, cfg, result));
  AtomicWrite(out / kRunConfigFile, RunConfigToJson(cfg).dump(2) + "\n");
  AtomicWrite(out / kManifestCopyFile, ManifestToJson(manifest).dump(2) + "\n");
  progress.Report(Stage::kDone, 1.0);
  return result;
}

}  // namespace imuplace
