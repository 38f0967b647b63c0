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

#ifndef IMUPLACE_SERVICE_HPP_
#define IMUPLACE_SERVICE_HPP_

#include <condition_variable>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <thread>
#include <vector>

#include "imuplace/config.hpp"
#include "imuplace/io.hpp"
#include "imuplace/pipeline.hpp"

namespace httplib {
class Server;
}

namespace imuplace {

namespace fs = std::filesystem;

inline constexpr const char* kServiceVersion = "0.1.0";

// Evaluation job as reported by GET /api/jobs/<id>. Stages run
// sampling -> synthesis -> evaluation -> done, or end in failed. Progress
// only grows and terminal records never change.
struct JobRecord {
  int id = 0;
  std::string stage = "sampling";
  double progress = 0.0;
  bool queued = true;
  std::optional<std::string> error;
  std::vector<std::string> activities;  // empty = all
  fs::path output;                      // relative to the workspace

  bool terminal() const { return stage == "done" || stage == "failed"; }
};

nlohmann::ordered_json JobToJson(const JobRecord& job);

struct ApiResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

struct ServiceOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::optional<fs::path> static_dir;
  std::string cors_origin = "*";
  // Selection defaults and job settings; falls back to
  // <workspace>/run_config.json, then built-in defaults.
  std::optional<RunConfig> config;
};

// Serves a pipeline workspace. The workspace needs a utility matrix, or a
// manifest from which a job can build one.
class ExplorerService {
 public:
  ExplorerService(fs::path workspace, ServiceOptions options);
  ~ExplorerService();
  ExplorerService(const ExplorerService&) = delete;
  ExplorerService& operator=(const ExplorerService&) = delete;

  // Binds and serves on a background thread. Throws kPortInUse.
  void Start();
  // Blocks until Stop() is called from elsewhere.
  void Wait();
  void Stop();
  int port() const { return port_; }

  // Endpoint logic, callable without HTTP.
  ApiResponse Health() const;
  ApiResponse Patches() const;
  ApiResponse Activities() const;
  ApiResponse Utility(const std::optional<std::string>& activity) const;
  ApiResponse UtilityMean() const;
  ApiResponse Select(const std::string& body) const;
  ApiResponse SubmitJob(const std::string& body);
  ApiResponse GetJob(int id) const;

  // Blocks until the job is terminal; returns its final record.
  JobRecord WaitForJob(int id) const;

 private:
  void LoadState();
  void WorkerLoop();
  void RunJob(int id);
  void UpdateJob(int id, Stage stage, double progress);

  fs::path workspace_;
  ServiceOptions options_;
  RunConfig config_;
  std::optional<DatasetManifest> manifest_;

  mutable std::shared_mutex state_mutex_;
  std::optional<StoredPatches> patches_;
  std::optional<UtilityMatrix> utility_;

  mutable std::mutex job_mutex_;
  mutable std::condition_variable job_cv_;
  std::map<int, JobRecord> jobs_;
  std::deque<int> pending_;
  int next_job_id_ = 1;
  bool stopping_ = false;
  std::thread worker_;

  std::unique_ptr<httplib::Server> server_;
  std::thread server_thread_;
  int port_ = 0;
};

}  // namespace imuplace

#endif  // IMUPLACE_SERVICE_HPP_
