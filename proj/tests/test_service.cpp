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

#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <random>
#include <sstream>
#include <thread>

#include "doctest.h"
#include "imuplace/cli.hpp"
#include "imuplace/error.hpp"
#include "imuplace/fixture.hpp"
#include "imuplace/sampling.hpp"
#include "imuplace/service.hpp"
#include "support.hpp"

// After Eigen: resolv.h, pulled in by httplib, defines _res.
#include "httplib.h"

using namespace imuplace;
using namespace imuplace::testing;
using nlohmann::json;

namespace {

ServiceOptions AnyPort() {
  ServiceOptions o;
  o.port = 0;
  return o;
}

// Workspace with a random utility matrix and a matching patch table.
void RandomWorkspace(const fs::path& dir, std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<int> ids;
  for (std::size_t i = 0; i < rows; ++i) ids.push_back(static_cast<int>(i));
  std::vector<std::string> acts;
  for (std::size_t j = 0; j < cols; ++j) acts.push_back("act" + std::to_string(j));
  UtilityMatrix m(ids, acts);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) m.at(i, j) = u(rng);
  }
  WriteUtilityMatrix(m, dir / kUtilityFile);

  const BodyModel body = BuildBodyModel();
  PatchSet patches = SamplePatches(body.topology, body.rest, static_cast<int>(std::min<std::size_t>(rows, 200)), 42);
  for (std::size_t i = 0; i < patches.patches.size(); ++i) {
    patches.patches[i].label = MajorityLabel(body.regions, patches.patches[i], patches.centers[i]);
  }
  WritePatchSet(patches, body.rest, dir / kPatchesFile);
}

std::string CliSelect(const fs::path& ws, const std::vector<std::string>& extra) {
  std::vector<std::string> args = {"imuplace", "--out", ws.string(), "select"};
  args.insert(args.end(), extra.begin(), extra.end());
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  RunCli(static_cast<int>(argv.size()), argv.data(), out, err);
  return out.str();
}

ErrorCode ConstructError(const fs::path& ws, ServiceOptions opts = AnyPort()) {
  try {
    ExplorerService s(ws, opts);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("service accepted the workspace");
  return ErrorCode::kIoFailure;
}

}  // namespace

TEST_CASE("service rejects bad workspaces") {
  TempDir dir("svc-bad");
  CHECK(ConstructError(dir / "nowhere") == ErrorCode::kBadWorkspace);
  CHECK(ConstructError(dir.path()) == ErrorCode::kBadWorkspace);
  std::ofstream(dir / kUtilityFile) << "location,a\n0,nan-ish\n";
  CHECK(ConstructError(dir.path()) == ErrorCode::kBadWorkspace);
}

TEST_CASE("service endpoints over http") {
  TempDir dir("svc");
  RandomWorkspace(dir.path(), 40, 4, 1);
  ExplorerService svc(dir.path(), AnyPort());
  svc.Start();
  REQUIRE(svc.port() > 0);
  httplib::Client client("127.0.0.1", svc.port());

  auto health = client.Get("/api/health");
  REQUIRE(health);
  CHECK(health->status == 200);
  CHECK(json::parse(health->body)["version"] == kServiceVersion);
  CHECK(health->get_header_value("Access-Control-Allow-Origin") == "*");

  auto patches = client.Get("/api/patches");
  REQUIRE(patches);
  const json p = json::parse(patches->body);
  const StoredPatches stored = LoadPatchSet(dir / kPatchesFile);
  REQUIRE(p["patches"].size() == stored.set.patches.size());
  for (std::size_t i = 0; i < stored.set.patches.size(); ++i) {
    const auto c = p["patches"][i]["centroid"].get<std::vector<double>>();
    CHECK((Vec3(c[0], c[1], c[2]) - stored.centroids[i]).norm() < 1e-12);
    CHECK(p["patches"][i]["label"].is_string());
  }

  auto acts = client.Get("/api/activities");
  REQUIRE(acts);
  CHECK(json::parse(acts->body)["activities"].size() == 4);

  auto util = client.Get("/api/utility?activity=act2");
  REQUIRE(util);
  CHECK(util->status == 200);
  const UtilityMatrix m = LoadUtilityMatrix(dir / kUtilityFile);
  const json scores = json::parse(util->body)["scores"];
  REQUIRE(scores.size() == 40);
  CHECK(scores[7]["f1"].get<double>() == m.at(7, 2));
  CHECK(client.Get("/api/utility")->status == 400);
  CHECK(client.Get("/api/utility?activity=nope")->status == 404);

  auto mean = client.Get("/api/utility/mean");
  REQUIRE(mean);
  const double expect = (m.at(3, 0) + m.at(3, 1) + m.at(3, 2) + m.at(3, 3)) / 4.0;
  CHECK(json::parse(mean->body)["scores"][3]["f1"].get<double>() == doctest::Approx(expect));

  auto pre = client.Options("/api/select");
  REQUIRE(pre);
  CHECK(pre->status == 204);
  CHECK(pre->get_header_value("Access-Control-Allow-Origin") == "*");
  CHECK(pre->get_header_value("Access-Control-Allow-Methods").find("POST") != std::string::npos);

  auto bad = client.Post("/api/select", "{tau", "application/json");
  REQUIRE(bad);
  CHECK(bad->status == 400);
  CHECK(json::parse(bad->body)["error"]["code"] == "InvalidInput");
  auto unknown = client.Post("/api/select", R"({"excluded": [999]})", "application/json");
  CHECK(unknown->status == 400);
  CHECK(client.Get("/api/jobs/77")->status == 404);
  CHECK(client.Post("/api/jobs", "{}", "application/json")->status == 409);
  svc.Stop();
}

TEST_CASE("service selection equals cli selection") {
  TempDir dir("svc-eq");
  RandomWorkspace(dir.path(), 18, 5, 2);
  ExplorerService svc(dir.path(), AnyPort());
  svc.Start();
  httplib::Client client("127.0.0.1", svc.port());
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> tau(0.3, 1.0);
  std::uniform_int_distribution<int> id(0, 17);
  for (int trial = 0; trial < 10; ++trial) {
    const double t = std::round(tau(rng) * 1000.0) / 1000.0;
    std::set<int> excluded;
    for (int k = 0; k < trial % 4; ++k) excluded.insert(id(rng));
    json body;
    body["tau"] = t;
    body["excluded"] = std::vector<int>(excluded.begin(), excluded.end());
    std::string list;
    for (int e : excluded) list += (list.empty() ? "" : ",") + std::to_string(e);
    std::vector<std::string> args = {"--tau", std::to_string(t)};
    if (!list.empty()) {
      args.push_back("--exclude");
      args.push_back(list);
    }
    const bool exhaustive = trial % 2 == 1;
    if (exhaustive) {
      body["exhaustive"] = true;
      args.push_back("--exhaustive");
    }
    auto res = client.Post("/api/select", body.dump(), "application/json");
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK(res->body == CliSelect(dir.path(), args));
  }
  svc.Stop();
}

TEST_CASE("selection latency on a 512 x 24 matrix") {
  TempDir dir("svc-lat");
  RandomWorkspace(dir.path(), 512, 24, 4);
  ExplorerService svc(dir.path(), AnyPort());
  svc.Start();
  httplib::Client client("127.0.0.1", svc.port());
  double worst_ms = 0.0;
  for (double tau : {0.8, 0.9, 0.95, 0.99}) {
    const auto start = std::chrono::steady_clock::now();
    auto res = client.Post("/api/select", json{{"tau", tau}}.dump(), "application/json");
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    REQUIRE(res);
    CHECK(res->status == 200);
    worst_ms = std::max(worst_ms, ms);
  }
  MESSAGE("worst select latency " << worst_ms << " ms");
  CHECK(worst_ms < 200.0);
  svc.Stop();
}

TEST_CASE("port already in use") {
  TempDir dir("svc-port");
  RandomWorkspace(dir.path(), 5, 2, 5);
  ExplorerService first(dir.path(), AnyPort());
  first.Start();
  ServiceOptions same;
  same.port = first.port();
  ExplorerService second(dir.path(), same);
  try {
    second.Start();
    FAIL("expected PortInUse");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kPortInUse);
  }
  first.Stop();
}

TEST_CASE("queries leave the workspace untouched") {
  TempDir dir("svc-ro");
  RandomWorkspace(dir.path(), 12, 3, 6);
  auto listing = [&] {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(dir.path())) {
      if (e.is_regular_file()) files[e.path().string()] = ReadFileBytes(e.path());
    }
    return files;
  };
  const auto before = listing();
  ExplorerService svc(dir.path(), AnyPort());
  svc.Start();
  httplib::Client client("127.0.0.1", svc.port());
  for (const char* path : {"/api/health", "/api/patches", "/api/activities",
                           "/api/utility?activity=act0", "/api/utility/mean"}) {
    CHECK(client.Get(path)->status == 200);
  }
  CHECK(client.Post("/api/select", "{}", "application/json")->status == 200);
  svc.Stop();
  CHECK(listing() == before);
}

TEST_CASE("evaluation jobs") {
  TempDir dir("svc-jobs");
  FixtureOptions small;
  small.sequences_per_activity = 3;
  small.duration_s = 5.0;
  small.frame_rate = 30.0;
  const DatasetManifest manifest = LoadManifest(WriteFixtureDataset(dir / "data", small));
  const fs::path ws = dir / "ws";
  fs::create_directories(ws);
  AtomicWrite(ws / kManifestCopyFile, ManifestToJson(manifest).dump(2));

  ServiceOptions opts = AnyPort();
  RunConfig cfg;
  cfg.n_patches = 12;
  cfg.jobs = 2;
  opts.config = cfg;
  ExplorerService svc(ws, opts);
  svc.Start();
  httplib::Client client("127.0.0.1", svc.port());

  CHECK(client.Get("/api/utility/mean")->status == 409);
  CHECK(client.Post("/api/jobs", R"({"activities": ["swim"]})", "application/json")->status == 400);

  auto submit = client.Post("/api/jobs", "{}", "application/json");
  REQUIRE(submit);
  CHECK(submit->status == 202);
  const int full_id = json::parse(submit->body)["id"];
  auto subset = client.Post("/api/jobs", R"({"activities": ["leg", "arm"]})", "application/json");
  REQUIRE(subset);
  const json sub = json::parse(subset->body);
  CHECK(sub["activities"] == json::array({"arm", "leg"}));
  CHECK(sub["queued"] == true);

  // Poll the first job until it finishes; progress may only grow.
  double last = 0.0;
  std::string stage;
  const std::set<std::string> stages = {"sampling", "synthesis", "evaluation", "done", "failed"};
  for (int i = 0; i < 6000; ++i) {
    auto res = client.Get("/api/jobs/" + std::to_string(full_id));
    REQUIRE(res);
    const json j = json::parse(res->body);
    stage = j["stage"];
    CHECK(stages.count(stage) == 1);
    const double p = j["progress"];
    CHECK(p >= last);
    CHECK(p <= 1.0);
    last = p;
    if (stage == "done" || stage == "failed") {
      if (stage == "done") {
        CHECK(j["utility"]["activities"].size() == 3);
        CHECK(j["utility"]["rows"].size() == 12);
      }
      break;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  CHECK(stage == "done");
  CHECK(last == 1.0);

  // The full-set job refreshed the served workspace.
  CHECK(client.Get("/api/utility/mean")->status == 200);
  CHECK(client.Get("/api/patches")->status == 200);

  const JobRecord done = svc.WaitForJob(sub["id"]);
  CHECK(done.stage == "done");
  CHECK(done.output == fs::path("jobs") / std::to_string(done.id));
  const UtilityMatrix part = LoadUtilityMatrix(ws / done.output / kUtilityFile);
  CHECK(part.activities() == std::vector<std::string>{"arm", "leg"});
  // Terminal records stay put.
  const std::string snapshot = client.Get("/api/jobs/" + std::to_string(full_id))->body;
  CHECK(client.Get("/api/jobs/" + std::to_string(full_id))->body == snapshot);
  svc.Stop();
}

TEST_CASE("failed jobs report the error") {
  TempDir dir("svc-fail");
  FixtureOptions small;
  small.sequences_per_activity = 3;
  small.duration_s = 5.0;
  small.frame_rate = 30.0;
  const DatasetManifest manifest = LoadManifest(WriteFixtureDataset(dir / "data", small));
  const fs::path ws = dir / "ws";
  fs::create_directories(ws);
  AtomicWrite(ws / kManifestCopyFile, ManifestToJson(manifest).dump(2));
  ServiceOptions opts = AnyPort();
  RunConfig cfg;
  cfg.n_patches = 12;
  opts.config = cfg;
  ExplorerService svc(ws, opts);
  // A single activity cannot be classified.
  const ApiResponse r = svc.SubmitJob(R"({"activities": ["arm"]})");
  CHECK(r.status == 202);
  const JobRecord job = svc.WaitForJob(json::parse(r.body)["id"]);
  CHECK(job.stage == "failed");
  REQUIRE(job.error.has_value());
  CHECK(job.error->find("DegenerateLabels") != std::string::npos);
}
