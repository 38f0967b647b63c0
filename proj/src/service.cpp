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

#include "imuplace/service.hpp"

#include <algorithm>

#include "httplib.h"
#include "imuplace/error.hpp"

namespace imuplace {
namespace {

using ojson = nlohmann::ordered_json;

ApiResponse Json(int status, const ojson& j) {
  return {status, j.dump() + "\n"};
}

ApiResponse ErrorResponse(int status, ErrorCode code, const std::string& msg) {
  ojson j;
  j["error"]["code"] = ErrorCodeName(code);
  j["error"]["message"] = msg;
  return Json(status, j);
}

ApiResponse FromError(const Error& e) {
  int status = 400;
  switch (e.code()) {
    case ErrorCode::kIoFailure:
    case ErrorCode::kUnreadablePath:
    case ErrorCode::kBadMagic:
    case ErrorCode::kTruncatedFile:
      status = 500;
      break;
    default:
      break;
  }
  return ErrorResponse(status, e.code(), e.what());
}

ApiResponse NoUtility() {
  return ErrorResponse(409, ErrorCode::kBadWorkspace,
                       "workspace has no utility matrix yet; run a job first");
}

ojson UtilityToJson(const UtilityMatrix& u) {
  ojson j;
  j["activities"] = u.activities();
  auto rows = ojson::array();
  for (std::size_t r = 0; r < u.location_count(); ++r) {
    ojson row;
    row["location"] = u.locations()[r];
    std::vector<double> f1(u.activity_count());
    for (std::size_t c = 0; c < u.activity_count(); ++c) f1[c] = u.at(r, c);
    row["f1"] = f1;
    rows.push_back(std::move(row));
  }
  j["rows"] = std::move(rows);
  return j;
}

const char* JobStageName(Stage stage) {
  switch (stage) {
    case Stage::kSampling: return "sampling";
    case Stage::kSynthesis: return "synthesis";
    case Stage::kEvaluation:
    case Stage::kSelection: return "evaluation";
    case Stage::kDone: return "done";
  }
  return "failed";
}

void Reply(httplib::Response& res, const ApiResponse& api) {
  res.status = api.status;
  res.set_content(api.body, api.content_type);
}

}  // namespace

ojson JobToJson(const JobRecord& job) {
  ojson j;
  j["id"] = job.id;
  j["stage"] = job.stage;
  j["progress"] = job.progress;
  j["queued"] = job.queued;
  if (job.error) {
    j["error"] = *job.error;
  } else {
    j["error"] = nullptr;
  }
  j["activities"] = job.activities;
  j["output"] = job.output.generic_string();
  return j;
}

ExplorerService::ExplorerService(fs::path workspace, ServiceOptions options)
    : workspace_(std::move(workspace)), options_(std::move(options)) {
  std::error_code ec;
  if (!fs::is_directory(workspace_, ec)) {
    throw Error(ErrorCode::kBadWorkspace,
                workspace_.string() + " is not a directory");
  }
  const bool has_utility = fs::exists(workspace_ / kUtilityFile, ec);
  const bool has_manifest = fs::exists(workspace_ / kManifestCopyFile, ec);
  if (!has_utility && !has_manifest) {
    throw Error(ErrorCode::kBadWorkspace,
                workspace_.string() + " has neither " + kUtilityFile +
                    " nor " + kManifestCopyFile);
  }
  try {
    if (options_.config) {
      config_ = *options_.config;
    } else if (fs::exists(workspace_ / kRunConfigFile, ec)) {
      config_ = LoadRunConfig(workspace_ / kRunConfigFile);
    }
    if (has_manifest) manifest_ = LoadManifest(workspace_ / kManifestCopyFile);
    LoadState();
  } catch (const Error& e) {
    throw Error(ErrorCode::kBadWorkspace, e.what());
  }
  worker_ = std::thread([this] { WorkerLoop(); });
}

ExplorerService::~ExplorerService() {
  Stop();
  {
    std::lock_guard lock(job_mutex_);
    stopping_ = true;
  }
  job_cv_.notify_all();
  if (worker_.joinable()) worker_.join();
}

void ExplorerService::LoadState() {
  std::optional<StoredPatches> patches;
  std::optional<UtilityMatrix> utility;
  std::error_code ec;
  if (fs::exists(workspace_ / kPatchesFile, ec)) {
    patches = LoadPatchSet(workspace_ / kPatchesFile);
  }
  if (fs::exists(workspace_ / kUtilityFile, ec)) {
    utility = LoadUtilityMatrix(workspace_ / kUtilityFile);
  }
  std::unique_lock lock(state_mutex_);
  patches_ = std::move(patches);
  utility_ = std::move(utility);
}

void ExplorerService::Start() {
  if (server_) return;
  server_ = std::make_unique<httplib::Server>();
  httplib::Server& svr = *server_;
  svr.set_default_headers({{"Access-Control-Allow-Origin", options_.cors_origin}});
  // httplib sets SO_REUSEPORT by default, which lets a second server share
  // the port instead of failing to bind.
  svr.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
  });
  svr.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });
  svr.Get("/api/health", [this](const httplib::Request&, httplib::Response& res) {
    Reply(res, Health());
  });
  svr.Get("/api/patches", [this](const httplib::Request&, httplib::Response& res) {
    Reply(res, Patches());
  });
  svr.Get("/api/activities",
          [this](const httplib::Request&, httplib::Response& res) {
            Reply(res, Activities());
          });
  svr.Get("/api/utility", [this](const httplib::Request& req,
                                 httplib::Response& res) {
    std::optional<std::string> activity;
    if (req.has_param("activity")) activity = req.get_param_value("activity");
    Reply(res, Utility(activity));
  });
  svr.Get("/api/utility/mean",
          [this](const httplib::Request&, httplib::Response& res) {
            Reply(res, UtilityMean());
          });
  svr.Post("/api/select", [this](const httplib::Request& req,
                                 httplib::Response& res) {
    Reply(res, Select(req.body));
  });
  svr.Post("/api/jobs", [this](const httplib::Request& req,
                               httplib::Response& res) {
    Reply(res, SubmitJob(req.body));
  });
  svr.Get(R"(/api/jobs/(\d+))", [this](const httplib::Request& req,
                                       httplib::Response& res) {
    Reply(res, GetJob(std::stoi(req.matches[1].str())));
  });
  if (options_.static_dir && !svr.set_mount_point("/", options_.static_dir->string())) {
    throw Error(ErrorCode::kUnreadablePath, options_.static_dir->string());
  }

  if (options_.port == 0) {
    port_ = svr.bind_to_any_port(options_.host);
  } else {
    port_ = svr.bind_to_port(options_.host, options_.port) ? options_.port : -1;
  }
  if (port_ < 0) {
    server_.reset();
    throw Error(ErrorCode::kPortInUse,
                options_.host + ":" + std::to_string(options_.port));
  }
  server_thread_ = std::thread([&svr] { svr.listen_after_bind(); });
  svr.wait_until_ready();
}

void ExplorerService::Wait() {
  if (server_thread_.joinable()) server_thread_.join();
}

void ExplorerService::Stop() {
  if (server_) server_->stop();
  if (server_thread_.joinable()) server_thread_.join();
}

ApiResponse ExplorerService::Health() const {
  ojson j;
  j["status"] = "ok";
  j["version"] = kServiceVersion;
  std::shared_lock lock(state_mutex_);
  j["has_utility"] = utility_.has_value();
  j["has_patches"] = patches_.has_value();
  return Json(200, j);
}

ApiResponse ExplorerService::Patches() const {
  std::shared_lock lock(state_mutex_);
  if (!patches_) {
    return ErrorResponse(409, ErrorCode::kBadWorkspace,
                         "workspace has no patch table yet");
  }
  ojson j;
  j["seed"] = patches_->set.seed;
  auto list = ojson::array();
  for (std::size_t i = 0; i < patches_->set.patches.size(); ++i) {
    const SurfacePatch& p = patches_->set.patches[i];
    ojson e;
    e["id"] = p.id;
    e["center"] = patches_->set.centers[i];
    e["vertices"] = p.vertices;
    if (p.label) {
      e["label"] = *p.label;
    } else {
      e["label"] = nullptr;
    }
    const Vec3& c = patches_->centroids[i];
    e["centroid"] = {c.x(), c.y(), c.z()};
    list.push_back(std::move(e));
  }
  j["patches"] = std::move(list);
  return Json(200, j);
}

ApiResponse ExplorerService::Activities() const {
  std::shared_lock lock(state_mutex_);
  ojson j;
  if (utility_) {
    j["activities"] = utility_->activities();
  } else if (manifest_) {
    j["activities"] = manifest_->Activities();
  } else {
    j["activities"] = ojson::array();
  }
  return Json(200, j);
}

ApiResponse ExplorerService::Utility(
    const std::optional<std::string>& activity) const {
  if (!activity) {
    return ErrorResponse(400, ErrorCode::kInvalidInput,
                         "missing query parameter 'activity'");
  }
  std::shared_lock lock(state_mutex_);
  if (!utility_) return NoUtility();
  const auto col = utility_->ColumnOf(*activity);
  if (!col) {
    return ErrorResponse(404, ErrorCode::kUnknownActivity, *activity);
  }
  ojson j;
  j["activity"] = *activity;
  auto scores = ojson::array();
  for (std::size_t r = 0; r < utility_->location_count(); ++r) {
    scores.push_back(
        {{"location", utility_->locations()[r]}, {"f1", utility_->at(r, *col)}});
  }
  j["scores"] = std::move(scores);
  return Json(200, j);
}

ApiResponse ExplorerService::UtilityMean() const {
  std::shared_lock lock(state_mutex_);
  if (!utility_) return NoUtility();
  ojson j;
  auto scores = ojson::array();
  const std::size_t t = utility_->activity_count();
  for (std::size_t r = 0; r < utility_->location_count(); ++r) {
    double sum = 0.0;
    for (std::size_t c = 0; c < t; ++c) sum += utility_->at(r, c);
    scores.push_back({{"location", utility_->locations()[r]},
                      {"f1", t ? sum / static_cast<double>(t) : 0.0}});
  }
  j["scores"] = std::move(scores);
  return Json(200, j);
}

ApiResponse ExplorerService::Select(const std::string& body) const {
  SelectionRequest request;
  request.tau = config_.tau;
  request.excluded = config_.excluded;
  request.max_sensors = config_.max_sensors;
  bool exhaustive = false;
  try {
    const auto j = body.empty() ? nlohmann::json::object()
                                : nlohmann::json::parse(body);
    if (!j.is_object()) {
      return ErrorResponse(400, ErrorCode::kInvalidInput,
                           "request body must be a JSON object");
    }
    if (j.contains("tau")) request.tau = j["tau"].get<double>();
    if (j.contains("excluded")) {
      const auto ids = j["excluded"].get<std::vector<int>>();
      request.excluded = std::set<int>(ids.begin(), ids.end());
    }
    if (j.contains("max_sensors")) {
      if (j["max_sensors"].is_null()) {
        request.max_sensors.reset();
      } else {
        request.max_sensors = j["max_sensors"].get<int>();
      }
    }
    if (j.contains("exhaustive")) exhaustive = j["exhaustive"].get<bool>();
  } catch (const nlohmann::json::exception& e) {
    return ErrorResponse(400, ErrorCode::kInvalidInput, e.what());
  }
  std::shared_lock lock(state_mutex_);
  if (!utility_) return NoUtility();
  try {
    return {200, FormatSelection(RunSelection(*utility_, request, exhaustive))};
  } catch (const Error& e) {
    return FromError(e);
  }
}

ApiResponse ExplorerService::SubmitJob(const std::string& body) {
  if (!manifest_) {
    return ErrorResponse(409, ErrorCode::kBadWorkspace,
                         "workspace has no manifest to evaluate");
  }
  std::vector<std::string> activities;
  try {
    const auto j = body.empty() ? nlohmann::json::object()
                                : nlohmann::json::parse(body);
    if (j.contains("activities")) {
      activities = j["activities"].get<std::vector<std::string>>();
    }
  } catch (const nlohmann::json::exception& e) {
    return ErrorResponse(400, ErrorCode::kInvalidInput, e.what());
  }
  std::sort(activities.begin(), activities.end());
  activities.erase(std::unique(activities.begin(), activities.end()),
                   activities.end());
  const std::vector<std::string> known = manifest_->Activities();
  for (const std::string& a : activities) {
    if (!std::binary_search(known.begin(), known.end(), a)) {
      return ErrorResponse(400, ErrorCode::kUnknownActivity, a);
    }
  }
  if (activities == known) activities.clear();

  JobRecord job;
  {
    std::lock_guard lock(job_mutex_);
    job.id = next_job_id_++;
    job.activities = activities;
    // Full-set jobs refresh the served workspace; subsets stay separate.
    job.output = activities.empty() ? fs::path(".")
                                    : fs::path("jobs") / std::to_string(job.id);
    jobs_[job.id] = job;
    pending_.push_back(job.id);
  }
  job_cv_.notify_all();
  return Json(202, JobToJson(job));
}

ApiResponse ExplorerService::GetJob(int id) const {
  std::lock_guard lock(job_mutex_);
  const auto it = jobs_.find(id);
  if (it == jobs_.end()) {
    return ErrorResponse(404, ErrorCode::kInvalidInput,
                         "no job " + std::to_string(id));
  }
  ojson j = JobToJson(it->second);
  if (it->second.stage == "done") {
    try {
      j["utility"] = UtilityToJson(LoadUtilityMatrix(
          workspace_ / it->second.output / kUtilityFile));
    } catch (const Error& e) {
      return FromError(e);
    }
  }
  return Json(200, j);
}

JobRecord ExplorerService::WaitForJob(int id) const {
  std::unique_lock lock(job_mutex_);
  job_cv_.wait(lock, [&] {
    const auto it = jobs_.find(id);
    return it == jobs_.end() || it->second.terminal();
  });
  const auto it = jobs_.find(id);
  if (it == jobs_.end()) {
    throw Error(ErrorCode::kInvalidInput, "no job " + std::to_string(id));
  }
  return it->second;
}

void ExplorerService::WorkerLoop() {
  for (;;) {
    int id = 0;
    {
      std::unique_lock lock(job_mutex_);
      job_cv_.wait(lock, [&] { return stopping_ || !pending_.empty(); });
      if (stopping_) return;
      id = pending_.front();
      pending_.pop_front();
      jobs_[id].queued = false;
    }
    job_cv_.notify_all();
    RunJob(id);
  }
}

void ExplorerService::UpdateJob(int id, Stage stage, double progress) {
  {
    std::lock_guard lock(job_mutex_);
    JobRecord& job = jobs_[id];
    if (job.terminal() || stage == Stage::kDone) return;
    job.stage = JobStageName(stage);
    job.progress = std::max(job.progress, std::min(progress, 1.0));
  }
  job_cv_.notify_all();
}

void ExplorerService::RunJob(int id) {
  JobRecord snapshot;
  {
    std::lock_guard lock(job_mutex_);
    snapshot = jobs_[id];
  }
  std::optional<std::string> failure;
  try {
    PipelineOptions opts;
    opts.out_dir = workspace_ / snapshot.output;
    opts.cache_dir = workspace_ / kCacheDir;
    opts.activities = snapshot.activities;
    opts.progress = [this, id](Stage stage, double p) { UpdateJob(id, stage, p); };
    RunConfig cfg = config_;
    cfg.out_dir = opts.out_dir;
    RunPipeline(*manifest_, cfg, opts);
    if (snapshot.activities.empty()) LoadState();
  } catch (const Error& e) {
    failure = e.what();
  } catch (const std::exception& e) {
    failure = e.what();
  }
  {
    std::lock_guard lock(job_mutex_);
    JobRecord& job = jobs_[id];
    if (failure) {
      job.stage = "failed";
      job.error = failure;
    } else {
      job.stage = "done";
      job.progress = 1.0;
    }
  }
  job_cv_.notify_all();
}

}  // namespace imuplace
