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

#include "imuplace/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string_view>

#include "imuplace/error.hpp"

namespace imuplace {
namespace {

class ByteWriter {
 public:
  void U32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void I32(std::int32_t v) { U32(static_cast<std::uint32_t>(v)); }
  void U64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void F32(float v) { U32(std::bit_cast<std::uint32_t>(v)); }
  void F64(double v) { U64(std::bit_cast<std::uint64_t>(v)); }
  void Raw(std::string_view s) { out_.append(s); }
  std::string Take() { return std::move(out_); }

 private:
  std::string out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string_view data) : data_(data) {}

  std::uint32_t U32() {
    Need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_ + i]))
           << (8 * i);
    }
    pos_ += 4;
    return v;
  }
  std::int32_t I32() { return static_cast<std::int32_t>(U32()); }
  std::uint64_t U64() {
    Need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i]))
           << (8 * i);
    }
    pos_ += 8;
    return v;
  }
  float F32() { return std::bit_cast<float>(U32()); }
  double F64() { return std::bit_cast<double>(U64()); }
  std::string_view Raw(std::size_t n) {
    Need(n);
    const std::string_view s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  void Need(std::size_t n) const {
    if (data_.size() - pos_ < n) {
      throw Error(ErrorCode::kTruncatedFile,
                  "needed " + std::to_string(n) + " bytes at offset " +
                      std::to_string(pos_) + ", " +
                      std::to_string(data_.size() - pos_) + " left");
    }
  }

  std::string_view data_;
  std::size_t pos_ = 0;
};

std::vector<std::string_view> SplitLines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

std::vector<std::string_view> SplitCells(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return cells;
}

template <typename T>
T ParseNumber(std::string_view cell, std::size_t line_no) {
  T value{};
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || cell.empty()) {
    throw Error(ErrorCode::kMalformedTable,
                "line " + std::to_string(line_no) + ": '" + std::string(cell) +
                    "' is not a number");
  }
  return value;
}

std::string FormatFixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

std::string FormatGeneral(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

void CheckLabel(const std::string& label) {
  if (label.find_first_of(",\n\r") != std::string::npos) {
    throw Error(ErrorCode::kInvalidInput,
                "label '" + label + "' contains a separator");
  }
}

// Per-frame OBJ reader: vertices and triangulated faces.
struct ObjFrame {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;
};

ObjFrame ParseObj(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kUnreadablePath, path.string());
  }
  ObjFrame frame;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "v") {
      Vec3 v;
      if (!(ss >> v.x() >> v.y() >> v.z())) {
        throw Error(ErrorCode::kInvalidInput,
                    path.string() + ":" + std::to_string(line_no) +
                        ": bad vertex");
      }
      frame.vertices.push_back(v);
    } else if (tag == "f") {
      std::vector<std::uint32_t> idx;
      std::string token;
      while (ss >> token) {
        const std::string head = token.substr(0, token.find('/'));
        long i = 0;
        try {
          i = std::stol(head);
        } catch (const std::exception&) {
          throw Error(ErrorCode::kInvalidInput,
                      path.string() + ":" + std::to_string(line_no) +
                          ": bad face index");
        }
        if (i < 0) i = static_cast<long>(frame.vertices.size()) + i + 1;
        if (i < 1) {
          throw Error(ErrorCode::kInvalidInput,
                      path.string() + ":" + std::to_string(line_no) +
                          ": face index out of range");
        }
        idx.push_back(static_cast<std::uint32_t>(i - 1));
      }
      for (std::size_t k = 1; k + 1 < idx.size(); ++k) {
        frame.faces.push_back({idx[0], idx[k], idx[k + 1]});
      }
    }
  }
  return frame;
}

MeshSequence LoadObjDirectory(const fs::path& dir,
                              std::optional<double> frame_rate,
                              std::size_t min_frames) {
  if (!frame_rate) {
    throw Error(ErrorCode::kInvalidInput,
                "OBJ directory " + dir.string() + " needs a frame rate");
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".obj") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    throw Error(ErrorCode::kUnreadablePath,
                dir.string() + " contains no .obj files");
  }

  MeshSequence seq;
  seq.frame_rate = *frame_rate;
  for (std::size_t f = 0; f < files.size(); ++f) {
    ObjFrame frame = ParseObj(files[f]);
    if (f == 0) {
      seq.topology.vertex_count =
          static_cast<std::uint32_t>(frame.vertices.size());
      seq.topology.faces = std::move(frame.faces);
    } else if (frame.vertices.size() != seq.topology.vertex_count ||
               frame.faces != seq.topology.faces) {
      throw Error(ErrorCode::kTopologyMismatch,
                  files[f].filename().string() + " has " +
                      std::to_string(frame.vertices.size()) +
                      " vertices / " + std::to_string(frame.faces.size()) +
                      " faces, first frame has " +
                      std::to_string(seq.topology.vertex_count) + " / " +
                      std::to_string(seq.topology.faces.size()));
    }
    seq.frames.push_back(std::move(frame.vertices));
  }
  seq.Validate(min_frames);
  return seq;
}

}  // namespace

std::string ReadFileBytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kUnreadablePath, path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) {
    throw Error(ErrorCode::kIoFailure, "read failed: " + path.string());
  }
  return ss.str();
}

void AtomicWrite(const fs::path& path, const std::string& bytes) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error(ErrorCode::kIoFailure, "cannot write " + tmp.string());
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
      throw Error(ErrorCode::kIoFailure, "write failed: " + tmp.string());
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    throw Error(ErrorCode::kIoFailure,
                "rename to " + path.string() + ": " + ec.message());
  }
}

std::string EncodeMeshSequence(const MeshSequence& seq) {
  ByteWriter w;
  w.Raw(std::string_view(kMeshMagic, 4));
  w.U32(kMeshVersion);
  w.U32(static_cast<std::uint32_t>(seq.frames.size()));
  w.U32(seq.topology.vertex_count);
  w.U32(static_cast<std::uint32_t>(seq.topology.faces.size()));
  w.F32(static_cast<float>(seq.frame_rate));
  for (const Face& f : seq.topology.faces) {
    for (std::uint32_t i : f) w.U32(i);
  }
  for (const auto& frame : seq.frames) {
    for (const Vec3& v : frame) {
      w.F32(static_cast<float>(v.x()));
      w.F32(static_cast<float>(v.y()));
      w.F32(static_cast<float>(v.z()));
    }
  }
  return w.Take();
}

namespace {

MeshSequence DecodeMesh(const std::string& bytes, std::size_t min_frames) {
  ByteReader r(bytes);
  if (bytes.size() >= 4 && std::memcmp(bytes.data(), kMeshMagic, 4) != 0) {
    throw Error(ErrorCode::kBadMagic, "not a mesh sequence file");
  }
  r.Raw(4);
  const std::uint32_t version = r.U32();
  if (version != kMeshVersion) {
    throw Error(ErrorCode::kBadMagic,
                "unsupported version " + std::to_string(version));
  }
  const std::uint32_t frame_count = r.U32();
  const std::uint32_t vertex_count = r.U32();
  const std::uint32_t face_count = r.U32();
  MeshSequence seq;
  seq.frame_rate = static_cast<double>(r.F32());
  seq.topology.vertex_count = vertex_count;

  const std::uint64_t expected =
      24ULL + 12ULL * face_count +
      12ULL * static_cast<std::uint64_t>(frame_count) * vertex_count;
  if (bytes.size() < expected) {
    throw Error(ErrorCode::kTruncatedFile,
                std::to_string(bytes.size()) + " bytes, header implies " +
                    std::to_string(expected));
  }
  if (bytes.size() > expected) {
    throw Error(ErrorCode::kInvalidInput,
                std::to_string(bytes.size() - expected) + " trailing bytes");
  }
  seq.topology.faces.resize(face_count);
  for (Face& f : seq.topology.faces) {
    for (std::uint32_t& i : f) i = r.U32();
  }
  seq.frames.resize(frame_count);
  for (auto& frame : seq.frames) {
    frame.resize(vertex_count);
    for (Vec3& v : frame) {
      const float x = r.F32();
      const float y = r.F32();
      const float z = r.F32();
      v = Vec3(x, y, z);
    }
  }
  seq.Validate(min_frames);
  return seq;
}

MeshSequence LoadMesh(const fs::path& path, std::optional<double> frame_rate,
                      std::size_t min_frames) {
  std::error_code ec;
  if (!fs::exists(path, ec)) {
    throw Error(ErrorCode::kUnreadablePath, path.string());
  }
  if (fs::is_directory(path, ec)) {
    return LoadObjDirectory(path, frame_rate, min_frames);
  }
  MeshSequence seq = DecodeMesh(ReadFileBytes(path), min_frames);
  if (frame_rate) seq.frame_rate = *frame_rate;
  return seq;
}

}  // namespace

MeshSequence DecodeMeshSequence(const std::string& bytes) {
  return DecodeMesh(bytes, 3);
}

void SaveMeshSequence(const MeshSequence& seq, const fs::path& path) {
  AtomicWrite(path, EncodeMeshSequence(seq));
}

MeshSequence LoadMeshSequence(const fs::path& path,
                              std::optional<double> frame_rate) {
  return LoadMesh(path, frame_rate, 3);
}

MeshSequence LoadRestPose(const fs::path& path) {
  // Rest-pose consumers only need topology and the first frame; the rate is
  // irrelevant for OBJ input.
  MeshSequence seq = LoadMesh(path, 1.0, 1);
  seq.frames.resize(1);
  return seq;
}

std::string FormatUtilityMatrix(const UtilityMatrix& matrix) {
  std::string out = "location";
  for (const std::string& a : matrix.activities()) {
    CheckLabel(a);
    out += "," + a;
  }
  out += "\n";
  for (std::size_t r = 0; r < matrix.location_count(); ++r) {
    out += std::to_string(matrix.locations()[r]);
    for (std::size_t c = 0; c < matrix.activity_count(); ++c) {
      out += "," + FormatFixed(matrix.at(r, c), 6);
    }
    out += "\n";
  }
  return out;
}

UtilityMatrix ParseUtilityMatrix(const std::string& text) {
  const auto lines = SplitLines(text);
  if (lines.empty()) {
    throw Error(ErrorCode::kMalformedTable, "empty table");
  }
  const auto header = SplitCells(lines[0]);
  if (header.empty() || header[0] != "location") {
    throw Error(ErrorCode::kMalformedTable,
                "header must start with 'location'");
  }
  std::vector<std::string> activities;
  for (std::size_t c = 1; c < header.size(); ++c) {
    if (header[c].empty()) {
      throw Error(ErrorCode::kMalformedTable, "empty activity label");
    }
    activities.emplace_back(header[c]);
  }
  std::vector<int> locations;
  std::vector<std::vector<double>> rows;
  for (std::size_t l = 1; l < lines.size(); ++l) {
    const auto cells = SplitCells(lines[l]);
    if (cells.size() != header.size()) {
      throw Error(ErrorCode::kMalformedTable,
                  "line " + std::to_string(l + 1) + " has " +
                      std::to_string(cells.size()) + " cells, expected " +
                      std::to_string(header.size()));
    }
    locations.push_back(ParseNumber<int>(cells[0], l + 1));
    std::vector<double> row;
    for (std::size_t c = 1; c < cells.size(); ++c) {
      row.push_back(ParseNumber<double>(cells[c], l + 1));
    }
    rows.push_back(std::move(row));
  }
  UtilityMatrix matrix(locations, activities);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      matrix.at(r, c) = rows[r][c];
    }
  }
  try {
    matrix.Validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kMalformedTable, e.detail());
  }
  return matrix;
}

void WriteUtilityMatrix(const UtilityMatrix& matrix, const fs::path& path) {
  AtomicWrite(path, FormatUtilityMatrix(matrix));
}

UtilityMatrix LoadUtilityMatrix(const fs::path& path) {
  return ParseUtilityMatrix(ReadFileBytes(path));
}

std::string FormatPatchSet(const PatchSet& set,
                           const std::vector<Vec3>& rest_vertices) {
  std::string out = "# seed=" + std::to_string(set.seed) + "\n";
  out += "id,v1,v2,v3,center,x,y,z,label\n";
  for (std::size_t i = 0; i < set.patches.size(); ++i) {
    const SurfacePatch& p = set.patches[i];
    Vec3 centroid = Vec3::Zero();
    for (std::uint32_t v : p.vertices) {
      if (v >= rest_vertices.size()) {
        throw Error(ErrorCode::kInvalidInput, "patch vertex out of range");
      }
      centroid += rest_vertices[v];
    }
    centroid /= 3.0;
    const std::string label = p.label.value_or("");
    CheckLabel(label);
    out += std::to_string(p.id) + "," + std::to_string(p.vertices[0]) + "," +
           std::to_string(p.vertices[1]) + "," + std::to_string(p.vertices[2]) +
           "," +
           std::to_string(i < set.centers.size() ? set.centers[i]
                                                 : p.vertices[0]) +
           "," + FormatGeneral(centroid.x()) + "," + FormatGeneral(centroid.y()) +
           "," + FormatGeneral(centroid.z()) + "," + label + "\n";
  }
  return out;
}

StoredPatches ParsePatchSet(const std::string& text) {
  StoredPatches stored;
  bool header_seen = false;
  std::size_t line_no = 0;
  for (std::string_view line : SplitLines(text)) {
    ++line_no;
    if (line.starts_with("# seed=")) {
      stored.set.seed = ParseNumber<std::uint64_t>(line.substr(7), line_no);
      continue;
    }
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      if (!line.starts_with("id,v1,v2,v3")) {
        throw Error(ErrorCode::kMalformedTable, "missing patch header");
      }
      header_seen = true;
      continue;
    }
    const auto cells = SplitCells(line);
    if (cells.size() != 9) {
      throw Error(ErrorCode::kMalformedTable,
                  "line " + std::to_string(line_no) + " needs 9 cells");
    }
    SurfacePatch p;
    p.id = ParseNumber<int>(cells[0], line_no);
    for (int k = 0; k < 3; ++k) {
      p.vertices[k] = ParseNumber<std::uint32_t>(cells[1 + k], line_no);
    }
    if (!cells[8].empty()) p.label = std::string(cells[8]);
    stored.set.centers.push_back(ParseNumber<std::uint32_t>(cells[4], line_no));
    stored.set.patches.push_back(std::move(p));
    stored.centroids.emplace_back(ParseNumber<double>(cells[5], line_no),
                                  ParseNumber<double>(cells[6], line_no),
                                  ParseNumber<double>(cells[7], line_no));
  }
  if (!header_seen) {
    throw Error(ErrorCode::kMalformedTable, "missing patch header");
  }
  return stored;
}

void WritePatchSet(const PatchSet& set, const std::vector<Vec3>& rest_vertices,
                   const fs::path& path) {
  AtomicWrite(path, FormatPatchSet(set, rest_vertices));
}

StoredPatches LoadPatchSet(const fs::path& path) {
  return ParsePatchSet(ReadFileBytes(path));
}

std::string EncodeTraces(const std::vector<ImuTrace>& traces) {
  ByteWriter w;
  w.Raw("IMUT");
  w.U32(1);
  w.U32(static_cast<std::uint32_t>(traces.size()));
  for (const ImuTrace& t : traces) {
    w.I32(t.patch_id);
    w.F64(t.rate);
    w.U32(static_cast<std::uint32_t>(t.samples.size()));
    for (const ImuSample& s : t.samples) {
      w.F64(s.t);
      for (int i = 0; i < 3; ++i) w.F64(s.accel[i]);
      for (int i = 0; i < 3; ++i) w.F64(s.gyro[i]);
    }
  }
  return w.Take();
}

std::vector<ImuTrace> DecodeTraces(const std::string& bytes) {
  ByteReader r(bytes);
  if (bytes.size() >= 4 && bytes.compare(0, 4, "IMUT") != 0) {
    throw Error(ErrorCode::kBadMagic, "not a trace bundle");
  }
  r.Raw(4);
  if (r.U32() != 1) {
    throw Error(ErrorCode::kBadMagic, "unsupported trace bundle version");
  }
  const std::uint32_t count = r.U32();
  std::vector<ImuTrace> traces(count);
  for (ImuTrace& t : traces) {
    t.patch_id = r.I32();
    t.rate = r.F64();
    const std::uint32_t n = r.U32();
    if (static_cast<std::uint64_t>(n) * 56 > r.remaining()) {
      throw Error(ErrorCode::kTruncatedFile, "trace samples cut short");
    }
    t.samples.resize(n);
    for (ImuSample& s : t.samples) {
      s.t = r.F64();
      for (int i = 0; i < 3; ++i) s.accel[i] = r.F64();
      for (int i = 0; i < 3; ++i) s.gyro[i] = r.F64();
    }
  }
  if (r.remaining() != 0) {
    throw Error(ErrorCode::kInvalidInput, "trailing bytes in trace bundle");
  }
  return traces;
}

void WriteTraces(const std::vector<ImuTrace>& traces, const fs::path& path) {
  AtomicWrite(path, EncodeTraces(traces));
}

std::vector<ImuTrace> LoadTraces(const fs::path& path) {
  return DecodeTraces(ReadFileBytes(path));
}

nlohmann::ordered_json SelectionToJson(const SelectionResult& result) {
  nlohmann::ordered_json j;
  j["tau"] = result.tau;
  j["feasible"] = result.feasible;
  j["coverage"] = result.coverage;
  j["selected"] = result.selected;
  auto best = nlohmann::ordered_json::array();
  for (const ActivityBest& b : result.per_activity_best) {
    nlohmann::ordered_json e;
    e["activity"] = b.activity;
    if (b.location) {
      e["location"] = *b.location;
    } else {
      e["location"] = nullptr;
    }
    e["f1"] = b.f1;
    best.push_back(std::move(e));
  }
  j["per_activity_best"] = std::move(best);
  return j;
}

SelectionResult SelectionFromJson(const nlohmann::json& j) {
  try {
    SelectionResult r;
    r.tau = j.at("tau").get<double>();
    r.feasible = j.at("feasible").get<bool>();
    r.coverage = j.at("coverage").get<double>();
    r.selected = j.at("selected").get<std::vector<int>>();
    for (const auto& e : j.at("per_activity_best")) {
      ActivityBest b;
      b.activity = e.at("activity").get<std::string>();
      if (!e.at("location").is_null()) b.location = e.at("location").get<int>();
      b.f1 = e.at("f1").get<double>();
      r.per_activity_best.push_back(std::move(b));
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidInput,
                std::string("selection json: ") + e.what());
  }
}

std::string FormatSelection(const SelectionResult& result) {
  return SelectionToJson(result).dump(2) + "\n";
}

}  // namespace imuplace
