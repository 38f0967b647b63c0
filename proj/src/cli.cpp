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

#include "imuplace/cli.hpp"

#include <sstream>

#include "CLI11.hpp"
#include "imuplace/error.hpp"
#include "imuplace/fixture.hpp"
#include "imuplace/pipeline.hpp"
#include "imuplace/service.hpp"

namespace imuplace {
namespace {

struct GlobalFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<int> jobs;
  std::string accel_frame;
};

// --config, else (when allowed) the workspace's run_config.json, else
// defaults; then --seed, --out and --jobs on top.
RunConfig ResolveConfig(const GlobalFlags& flags, bool workspace_fallback) {
  nlohmann::json j = nlohmann::json::object();
  std::error_code ec;
  if (!flags.config.empty()) {
    try {
      j = nlohmann::json::parse(ReadFileBytes(flags.config));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kInvalidInput, flags.config + ": " + e.what());
    }
  } else if (workspace_fallback && !flags.out.empty() &&
             fs::exists(fs::path(flags.out) / kRunConfigFile, ec)) {
    j = nlohmann::json::parse(
        ReadFileBytes(fs::path(flags.out) / kRunConfigFile));
  }
  if (flags.seed) {
    j.erase("fps_seed");
    if (j.contains("sensor") && j["sensor"].is_object()) {
      j["sensor"].erase("rng_seed");
      j["sensor"].erase("misalignment_seed");
    }
    j["seed"] = *flags.seed;
  }
  if (!flags.accel_frame.empty()) j["accel_frame"] = flags.accel_frame;
  RunConfig cfg = ParseRunConfig(j);
  if (!flags.out.empty()) cfg.out_dir = flags.out;
  if (flags.jobs) cfg.jobs = *flags.jobs;
  cfg.Validate();
  return cfg;
}

std::set<int> ParseIdList(const std::vector<std::string>& items) {
  std::set<int> ids;
  for (const std::string& item : items) {
    std::stringstream ss(item);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (tok.empty()) continue;
      try {
        std::size_t used = 0;
        const int id = std::stoi(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        ids.insert(id);
      } catch (const std::exception&) {
        throw Error(ErrorCode::kInvalidInput, "bad patch id '" + tok + "'");
      }
    }
  }
  return ids;
}

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Virtual IMU placement: synthesize body-worn sensor data from "
               "mesh sequences and pick sensor locations."};
  app.require_subcommand(1);
  app.fallthrough();
  GlobalFlags flags;
  app.add_option("--config", flags.config, "Run configuration (JSON)");
  app.add_option("--seed", flags.seed,
                 "Seed for patch sampling, noise and misalignment");
  app.add_option("--out", flags.out, "Output / workspace directory");
  app.add_option("--jobs", flags.jobs, "Worker threads")
      ->check(CLI::PositiveNumber);
  app.add_option("--accel-frame", flags.accel_frame,
                 "Accelerometer frame: local (default) or literal")
      ->check(CLI::IsMember({"local", "literal"}));

  // sample
  auto* sample = app.add_subcommand("sample", "Sample surface patches on a mesh");
  std::string sample_mesh, sample_labels;
  std::optional<int> sample_n;
  sample->add_option("--mesh", sample_mesh, "Mesh file or OBJ directory")
      ->required();
  sample->add_option("--n-patches", sample_n, "Number of patches");
  sample->add_option("--labels", sample_labels, "Per-vertex region labels");

  // synth
  auto* synth = app.add_subcommand("synth", "Synthesize ideal IMU traces");
  std::string synth_mesh, synth_patches, synth_output;
  std::optional<double> synth_rate;
  synth->add_option("--mesh", synth_mesh, "Mesh sequence")->required();
  synth->add_option("--patches", synth_patches,
                    "Patch table (default <out>/patches.csv)");
  synth->add_option("--output", synth_output, "Trace bundle to write")
      ->required();
  synth->add_option("--frame-rate", synth_rate, "Override the frame rate");

  // degrade
  auto* degrade = app.add_subcommand("degrade", "Apply the sensor model");
  std::string degrade_input, degrade_output, degrade_id;
  degrade->add_option("--input", degrade_input, "Ideal trace bundle")
      ->required();
  degrade->add_option("--output", degrade_output, "Trace bundle to write")
      ->required();
  degrade->add_option("--sequence-id", degrade_id,
                      "Sequence id for noise seeding (default: input stem)");

  // eval
  auto* eval = app.add_subcommand("eval", "Compute the utility matrix");
  std::string eval_index, eval_output;
  eval->add_option("--traces", eval_index,
                   "Trace index (default <out>/traces.json)");
  eval->add_option("--output", eval_output,
                   "Utility table (default <out>/utility.csv)");

  // select
  auto* select = app.add_subcommand("select", "Choose a sensor subset");
  std::string select_utility, select_output;
  std::optional<double> select_tau;
  std::vector<std::string> select_exclude;
  std::optional<int> select_max;
  bool select_exhaustive = false;
  select->add_option("--utility", select_utility,
                     "Utility table (default <out>/utility.csv)");
  select->add_option("--tau", select_tau, "Coverage threshold in [0, 1]");
  select->add_option("--exclude", select_exclude,
                     "Patch ids to exclude (comma separated or repeated)");
  select->add_option("--max-sensors", select_max, "Upper bound on subset size");
  select->add_flag("--exhaustive", select_exhaustive,
                   "Search all subsets (small candidate sets only)");
  select->add_option("--output", select_output, "Also write the result here");

  // run
  auto* run = app.add_subcommand("run", "Run the full pipeline");
  std::string run_manifest;
  run->add_option("--manifest", run_manifest, "Dataset manifest (JSON)")
      ->required();

  // serve
  auto* serve = app.add_subcommand("serve", "Serve a workspace over HTTP");
  int serve_port = 8080;
  std::string serve_host = "127.0.0.1", serve_static;
  serve->add_option("--port", serve_port, "Port (0 = any free port)");
  serve->add_option("--host", serve_host, "Bind address");
  serve->add_option("--static", serve_static, "Directory of UI assets");

  // fixture
  auto* fixture = app.add_subcommand(
      "fixture", "Write the synthetic three-activity body dataset");
  std::string fixture_dir;
  FixtureOptions fixture_opts;
  fixture->add_option("dir", fixture_dir, "Target directory")->required();
  fixture->add_option("--sequences", fixture_opts.sequences_per_activity,
                      "Sequences per activity");
  fixture->add_option("--duration", fixture_opts.duration_s,
                      "Sequence length in seconds");
  fixture->add_option("--frame-rate", fixture_opts.frame_rate, "Frame rate");
  fixture->add_option("--coupling", fixture_opts.coupling,
                      "Limb-to-torso counter-twist gain");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInvalidInput;
  }

  try {
    const fs::path out_dir = flags.out.empty() ? fs::path("out") : fs::path(flags.out);
    std::error_code ec;

    if (*sample) {
      RunConfig cfg = ResolveConfig(flags, false);
      if (sample_n) cfg.n_patches = *sample_n;
      const MeshSequence rest = LoadRestPose(sample_mesh);
      std::optional<std::vector<std::string>> labels;
      if (!sample_labels.empty()) {
        labels = LoadVertexLabels(sample_labels, rest.topology.vertex_count);
      }
      const std::string text = SampleStage(rest, labels ? &*labels : nullptr,
                                           cfg.n_patches, cfg.fps_seed);
      fs::create_directories(out_dir, ec);
      AtomicWrite(out_dir / kPatchesFile, text);
      out << "wrote " << cfg.n_patches << " patches to "
          << (out_dir / kPatchesFile).string() << "\n";
      return kExitOk;
    }

    if (*synth) {
      const RunConfig cfg = ResolveConfig(flags, false);
      const fs::path patches_path = synth_patches.empty()
                                        ? out_dir / kPatchesFile
                                        : fs::path(synth_patches);
      const StoredPatches patches = LoadPatchSet(patches_path);
      const MeshSequence seq = LoadMeshSequence(synth_mesh, synth_rate);
      const auto traces = SynthesizeStage(seq, patches.set, cfg.gravity,
                                          cfg.accel_frame, cfg.jobs);
      WriteTraces(traces, synth_output);
      out << "wrote " << traces.size() << " traces to " << synth_output << "\n";
      return kExitOk;
    }

    if (*degrade) {
      const RunConfig cfg = ResolveConfig(flags, false);
      const std::string id =
          degrade_id.empty() ? fs::path(degrade_input).stem().string() : degrade_id;
      const auto traces =
          DegradeStage(LoadTraces(degrade_input), cfg.sensor, id, cfg.jobs);
      WriteTraces(traces, degrade_output);
      out << "wrote " << traces.size() << " traces to " << degrade_output
          << "\n";
      return kExitOk;
    }

    if (*eval) {
      const RunConfig cfg = ResolveConfig(flags, false);
      const fs::path index_path =
          eval_index.empty() ? out_dir / kTraceIndexFile : fs::path(eval_index);
      const auto entries = LoadTraceIndex(index_path);
      const auto data = LoadIndexedTraces(entries, index_path.parent_path());
      const fs::path patches_path = index_path.parent_path() / kPatchesFile;
      const StoredPatches patches = LoadPatchSet(patches_path);
      UtilityMatrix u;
      try {
        u = ComputeUtilityMatrix(data, patches.set, cfg.eval, cfg.jobs);
      } catch (const Error& e) {
        throw e.WithContext("evaluation");
      }
      const fs::path target =
          eval_output.empty() ? out_dir / kUtilityFile : fs::path(eval_output);
      WriteUtilityMatrix(u, target);
      out << "wrote " << u.location_count() << "x" << u.activity_count()
          << " utility matrix to " << target.string() << "\n";
      return kExitOk;
    }

    if (*select) {
      const RunConfig cfg = ResolveConfig(flags, true);
      const fs::path utility_path = select_utility.empty()
                                        ? out_dir / kUtilityFile
                                        : fs::path(select_utility);
      const UtilityMatrix u = LoadUtilityMatrix(utility_path);
      SelectionRequest request;
      request.tau = select_tau.value_or(cfg.tau);
      request.excluded =
          select->count("--exclude") ? ParseIdList(select_exclude) : cfg.excluded;
      request.max_sensors = select_max ? select_max : cfg.max_sensors;
      const SelectionResult result = RunSelection(u, request, select_exhaustive);
      const std::string text = FormatSelection(result);
      if (!select_output.empty()) AtomicWrite(select_output, text);
      out << text;
      return result.feasible ? kExitOk : kExitInfeasible;
    }

    if (*run) {
      const RunConfig cfg = ResolveConfig(flags, false);
      const DatasetManifest manifest = LoadManifest(run_manifest);
      PipelineOptions opts;
      opts.out_dir = cfg.out_dir;
      opts.progress = [&err](Stage stage, double p) {
        err << "[" << StageName(stage) << "] " << static_cast<int>(p * 100)
            << "%\n";
      };
      const PipelineResult result = RunPipeline(manifest, cfg, opts);
      out << ReadFileBytes(cfg.out_dir / kSummaryFile);
      return result.selection.feasible ? kExitOk : kExitInfeasible;
    }

    if (*serve) {
      ServiceOptions opts;
      opts.host = serve_host;
      opts.port = serve_port;
      if (!serve_static.empty()) opts.static_dir = serve_static;
      if (!flags.config.empty() || flags.seed || !flags.accel_frame.empty()) {
        opts.config = ResolveConfig(flags, true);
      }
      ExplorerService service(out_dir, opts);
      service.Start();
      out << "serving " << out_dir.string() << " on http://" << serve_host
          << ":" << service.port() << "\n"
          << std::flush;
      service.Wait();
      return kExitOk;
    }

    if (*fixture) {
      if (flags.seed) fixture_opts.seed = *flags.seed;
      const fs::path manifest = WriteFixtureDataset(fixture_dir, fixture_opts);
      out << "wrote fixture manifest " << manifest.string() << "\n";
      return kExitOk;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return ExitCodeFor(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitInvalidInput;
}

}  // namespace imuplace
