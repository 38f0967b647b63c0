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

#include <fstream>

#include "doctest.h"
#include "imuplace/error.hpp"
#include "imuplace/fixture.hpp"
#include "imuplace/io.hpp"
#include "imuplace/pipeline.hpp"
#include "imuplace/sampling.hpp"
#include "support.hpp"

using namespace imuplace;
using namespace imuplace::testing;

namespace {

FixtureOptions SmallFixture() {
  FixtureOptions o;
  o.sequences_per_activity = 3;
  o.duration_s = 5.0;
  o.frame_rate = 30.0;
  return o;
}

RunConfig SmallConfig() {
  RunConfig cfg;
  cfg.n_patches = 12;
  cfg.jobs = 4;
  return cfg;
}

std::string Read(const fs::path& p) { return ReadFileBytes(p); }

}  // namespace

TEST_CASE("fixture body mesh is valid and connected") {
  const BodyModel body = BuildBodyModel();
  CHECK(body.rest.size() <= 500);
  CHECK_NOTHROW(body.topology.Validate());
  CHECK(body.regions.size() == body.rest.size());
  CHECK_NOTHROW(BuildAdjacency(body.topology, body.rest));
  const MeshSequence arm = AnimateBody(body, kArmActivity, 0, SmallFixture());
  CHECK(arm.frame_count() == 150);
  CHECK_NOTHROW(arm.Validate());
  // Legs stay still while the arms swing.
  const auto& first = arm.frames.front();
  const auto& mid = arm.frames[40];
  for (std::size_t v = 0; v < body.rest.size(); ++v) {
    if (body.regions[v].rfind("leg", 0) == 0) CHECK((first[v] - mid[v]).norm() == 0.0);
  }
}

TEST_CASE("pipeline produces every artifact and reruns identically") {
  TempDir dir("pipe");
  const fs::path manifest_path = WriteFixtureDataset(dir / "data", SmallFixture());
  const DatasetManifest manifest = LoadManifest(manifest_path);
  CHECK(manifest.Activities().size() == 3);
  const RunConfig cfg = SmallConfig();

  std::vector<std::pair<Stage, double>> seen;
  PipelineOptions opts;
  opts.out_dir = dir / "out";
  opts.progress = [&](Stage s, double p) { seen.emplace_back(s, p); };
  const PipelineResult first = RunPipeline(manifest, cfg, opts);
  CHECK(first.reused.empty());
  for (const char* f : {kPatchesFile, kTraceIndexFile, kUtilityFile, kSelectionFile,
                        kSummaryFile, kRunConfigFile, kManifestCopyFile}) {
    CHECK(fs::exists(opts.out_dir / f));
  }
  CHECK(first.utility.location_count() == 12);
  CHECK(first.utility.activity_count() == 3);
  CHECK(LoadTraceIndex(opts.out_dir / kTraceIndexFile).size() == 9);
  REQUIRE(seen.size() >= 2);
  CHECK(seen.front().second == 0.0);
  CHECK(seen.back().second == 1.0);
  CHECK(seen.back().first == Stage::kDone);
  for (std::size_t i = 1; i < seen.size(); ++i) {
    CHECK(seen[i].second >= seen[i - 1].second);
    CHECK(static_cast<int>(seen[i].first) >= static_cast<int>(seen[i - 1].first));
  }

  const std::string utility = Read(opts.out_dir / kUtilityFile);
  const std::string selection = Read(opts.out_dir / kSelectionFile);

  // Warm rerun: every stage comes from the cache and nothing changes.
  opts.progress = nullptr;
  const PipelineResult warm = RunPipeline(manifest, cfg, opts);
  CHECK(warm.reused.size() == 1 + 9 + 1);
  CHECK(Read(opts.out_dir / kUtilityFile) == utility);
  CHECK(Read(opts.out_dir / kSelectionFile) == selection);

  // A cold run elsewhere agrees byte for byte.
  PipelineOptions cold;
  cold.out_dir = dir / "cold";
  RunPipeline(manifest, cfg, cold);
  CHECK(Read(cold.out_dir / kUtilityFile) == utility);
  CHECK(Read(cold.out_dir / kSelectionFile) == selection);
  CHECK(Read(cold.out_dir / kPatchesFile) == Read(opts.out_dir / kPatchesFile));

  // A new noise seed keeps sampling and synthesis but redoes the rest.
  RunConfig reseeded = cfg;
  reseeded.sensor.rng_seed = 1234;
  const PipelineResult partial = RunPipeline(manifest, reseeded, opts);
  CHECK(partial.reused.size() == 1 + 9);
  for (const auto& name : partial.reused) {
    CHECK((name.rfind("sample-", 0) == 0 || name.rfind("synth-", 0) == 0));
  }
}

TEST_CASE("pipeline on an activity subset") {
  TempDir dir("subset");
  const DatasetManifest manifest = LoadManifest(WriteFixtureDataset(dir / "data", SmallFixture()));
  PipelineOptions opts;
  opts.out_dir = dir / "out";
  opts.activities = {kArmActivity, kLegActivity};
  const PipelineResult r = RunPipeline(manifest, SmallConfig(), opts);
  CHECK(r.utility.activities() == std::vector<std::string>{kArmActivity, kLegActivity});

  opts.activities = {"swim"};
  try {
    RunPipeline(manifest, SmallConfig(), opts);
    FAIL("expected UnknownActivity");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kUnknownActivity);
  }
}

TEST_CASE("single-activity manifest fails at evaluation") {
  TempDir dir("mono");
  DatasetManifest manifest = LoadManifest(WriteFixtureDataset(dir / "data", SmallFixture()));
  std::erase_if(manifest.sequences, [](const ManifestEntry& e) { return e.activity != kArmActivity; });
  PipelineOptions opts;
  opts.out_dir = dir / "out";
  try {
    RunPipeline(manifest, SmallConfig(), opts);
    FAIL("expected DegenerateLabels");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDegenerateLabels);
    CHECK(std::string(e.what()).find("evaluation") != std::string::npos);
  }
}

TEST_CASE("bad sequence file is reported with its id") {
  TempDir dir("bad");
  DatasetManifest manifest = LoadManifest(WriteFixtureDataset(dir / "data", SmallFixture()));
  std::ofstream(manifest.sequences[1].path, std::ios::trunc) << "garbage";
  PipelineOptions opts;
  opts.out_dir = dir / "out";
  try {
    RunPipeline(manifest, SmallConfig(), opts);
    FAIL("expected BadMagic");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kBadMagic);
    CHECK(std::string(e.what()).find("synthesis: sequence " + manifest.sequences[1].id) !=
          std::string::npos);
  }
}

TEST_CASE("sequence noise seeds") {
  CHECK(SequenceNoiseSeed(1, "a") == SequenceNoiseSeed(1, "a"));
  CHECK(SequenceNoiseSeed(1, "a") != SequenceNoiseSeed(1, "b"));
  CHECK(SequenceNoiseSeed(1, "a") != SequenceNoiseSeed(2, "a"));
}
