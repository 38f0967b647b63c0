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
#include "imuplace/config.hpp"
#include "imuplace/error.hpp"
#include "imuplace/io.hpp"
#include "support.hpp"

using namespace imuplace;
using namespace imuplace::testing;

namespace {

template <class F>
ErrorCode CodeOf(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::kIoFailure;
}

MeshSequence SmallSequence(int frames) {
  return Animate(UnitTriangle(), frames, 30.0, [](int k, const Vec3& p) {
    return Vec3(p + Vec3(0.25 * k, 0.0, -0.5 * k));
  });
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream(path) << text;
}

std::string Obj(const std::vector<Vec3>& v, const std::string& faces) {
  std::string s;
  for (const Vec3& p : v) {
    s += "v " + std::to_string(p.x()) + " " + std::to_string(p.y()) + " " +
         std::to_string(p.z()) + "\n";
  }
  return s + faces;
}

}  // namespace

TEST_CASE("mesh container round trip") {
  const MeshSequence seq = SmallSequence(3);
  const std::string bytes = EncodeMeshSequence(seq);
  CHECK(bytes.size() == 24 + 12 * 1 + 12 * 3 * 3);
  CHECK(bytes.substr(0, 4) == "W2WM");
  const MeshSequence back = DecodeMeshSequence(bytes);
  CHECK(back.frame_count() == 3);
  CHECK(back.topology.faces == seq.topology.faces);
  CHECK(back.frame_rate == 30.0);
  for (std::size_t f = 0; f < 3; ++f) {
    for (std::size_t v = 0; v < 3; ++v) {
      CHECK((back.frames[f][v] - seq.frames[f][v]).norm() < 1e-6);
    }
  }

  TempDir dir("io");
  SaveMeshSequence(seq, dir / "m.w2wm");
  CHECK(LoadMeshSequence(dir / "m.w2wm").frame_count() == 3);
  CHECK(LoadMeshSequence(dir / "m.w2wm", 120.0).frame_rate == 120.0);
  CHECK(LoadRestPose(dir / "m.w2wm").frame_count() == 1);
}

TEST_CASE("mesh container errors") {
  const std::string bytes = EncodeMeshSequence(SmallSequence(3));
  CHECK(CodeOf([&] { DecodeMeshSequence(bytes.substr(0, bytes.size() - 7)); }) ==
        ErrorCode::kTruncatedFile);
  std::string bad = bytes;
  bad[0] = 'X';
  CHECK(CodeOf([&] { DecodeMeshSequence(bad); }) == ErrorCode::kBadMagic);
  CHECK(CodeOf([&] { DecodeMeshSequence(EncodeMeshSequence(SmallSequence(2))); }) ==
        ErrorCode::kTooShortSequence);
  CHECK(CodeOf([&] { LoadMeshSequence("/nonexistent/file.w2wm"); }) ==
        ErrorCode::kUnreadablePath);
}

TEST_CASE("obj directory import") {
  TempDir dir("obj");
  const std::vector<Vec3> v = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(1, 1, 0)};
  const std::string faces = "f 1 2 3\nf 2/1 4/1 3/1\n";
  for (int k = 0; k < 4; ++k) {
    std::vector<Vec3> moved = v;
    for (Vec3& p : moved) p.z() += 0.1 * k;
    WriteText(dir / ("frame_" + std::to_string(k) + ".obj"), Obj(moved, faces));
  }
  const MeshSequence seq = LoadMeshSequence(dir.path(), 25.0);
  CHECK(seq.frame_count() == 4);
  CHECK(seq.topology.vertex_count == 4);
  CHECK(seq.topology.faces.size() == 2);
  CHECK(seq.frames[3][3].z() == doctest::Approx(0.3));
  CHECK(CodeOf([&] { LoadMeshSequence(dir.path()); }) == ErrorCode::kInvalidInput);

  WriteText(dir / "frame_2.obj", Obj({v[0], v[1], v[2]}, "f 1 2 3\n"));
  CHECK(CodeOf([&] { LoadMeshSequence(dir.path(), 25.0); }) == ErrorCode::kTopologyMismatch);
}

TEST_CASE("utility table round trip") {
  UtilityMatrix m({5, 2}, {"walk", "jump"});
  m.at(0, 0) = 0.123456789;
  m.at(0, 1) = 1.0;
  m.at(1, 0) = 0.0;
  m.at(1, 1) = 0.5;
  const std::string text = FormatUtilityMatrix(m);
  CHECK(text.rfind("location,walk,jump\n", 0) == 0);
  const UtilityMatrix back = ParseUtilityMatrix(text);
  CHECK(back.locations() == m.locations());
  CHECK(back.activities() == m.activities());
  for (std::size_t r = 0; r < 2; ++r) {
    for (std::size_t c = 0; c < 2; ++c) CHECK(std::abs(back.at(r, c) - m.at(r, c)) <= 1e-6);
  }
  CHECK(FormatUtilityMatrix(back) == text);

  CHECK(CodeOf([] { ParseUtilityMatrix("location,a\n1,abc\n"); }) == ErrorCode::kMalformedTable);
  CHECK(CodeOf([] { ParseUtilityMatrix("location,a\n1,0.5,0.2\n"); }) == ErrorCode::kMalformedTable);
  CHECK(CodeOf([] { ParseUtilityMatrix(""); }) == ErrorCode::kMalformedTable);
  CHECK(CodeOf([] { ParseUtilityMatrix("location,a\n1,1.5\n"); }) == ErrorCode::kMalformedTable);

  TempDir dir("u");
  WriteUtilityMatrix(m, dir / "u.csv");
  CHECK(LoadUtilityMatrix(dir / "u.csv").locations() == m.locations());
}

TEST_CASE("patch table round trip") {
  const auto tri = UnitTriangle();
  PatchSet set;
  set.seed = 17;
  set.centers = {2};
  set.patches = {{0, {0, 1, 2}, std::string("arm_left")}};
  const std::string text = FormatPatchSet(set, tri.vertices);
  const StoredPatches back = ParsePatchSet(text);
  CHECK(back.set.seed == 17);
  CHECK(back.set.centers == set.centers);
  REQUIRE(back.set.patches.size() == 1);
  CHECK(back.set.patches[0].vertices == set.patches[0].vertices);
  CHECK(back.set.patches[0].label == set.patches[0].label);
  CHECK((back.centroids[0] - Vec3(1.0 / 3, 1.0 / 3, 0)).norm() < 1e-6);
  CHECK(FormatPatchSet(back.set, tri.vertices) == text);
}

TEST_CASE("trace bundle round trip") {
  ImuTrace a{3, 50.0, {{0.0, Vec3(1, 2, 3), Vec3(4, 5, 6)}, {0.02, Vec3(-1, 0.5, 1e-17), Vec3(0, 0, 1)}}};
  ImuTrace b{9, 25.0, {}};
  const std::string bytes = EncodeTraces({a, b});
  const auto back = DecodeTraces(bytes);
  REQUIRE(back.size() == 2);
  CHECK(back[0].patch_id == 3);
  CHECK(back[0].samples[1].accel == a.samples[1].accel);
  CHECK(back[1].rate == 25.0);
  CHECK(EncodeTraces(back) == bytes);
  CHECK(CodeOf([&] { DecodeTraces(bytes.substr(0, bytes.size() - 3)); }) != ErrorCode::kIoFailure);
  CHECK(CodeOf([&] { DecodeTraces("nope"); }) == ErrorCode::kBadMagic);
}

TEST_CASE("selection json round trip") {
  SelectionResult r;
  r.selected = {4, 1};
  r.coverage = 0.925;
  r.feasible = true;
  r.tau = 0.9;
  r.per_activity_best = {{"a", 4, 0.95}, {"b", 1, 0.9}, {"c", std::nullopt, 0.0}};
  CHECK(SelectionFromJson(SelectionToJson(r)) == r);
  const std::string text = FormatSelection(r);
  CHECK(text.back() == '\n');
  CHECK(nlohmann::json::parse(text)["selected"] == nlohmann::json::array({4, 1}));
}

TEST_CASE("atomic writes leave no temporary behind") {
  TempDir dir("w");
  AtomicWrite(dir / "sub" / "x.txt", "hello");
  CHECK(ReadFileBytes(dir / "sub" / "x.txt") == "hello");
  AtomicWrite(dir / "sub" / "x.txt", "bye");
  CHECK(ReadFileBytes(dir / "sub" / "x.txt") == "bye");
  int entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir / "sub")) ++entries;
  CHECK(entries == 1);
}
