// Copyright 2026 The Telewaypoint Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "telewaypoint/bots.hpp"
#include "telewaypoint/session.hpp"

namespace httplib {
class Server;
}

namespace telewaypoint {

// Error surfaced to API clients as {"error": code, "message": ...}.
class ApiError : public std::runtime_error {
 public:
  ApiError(int status, std::string code, const std::string& message)
      : std::runtime_error(message), status_(status), code_(std::move(code)) {}
  int status() const { return status_; }
  const std::string& code() const { return code_; }

 private:
  int status_;
  std::string code_;
};

struct ServiceConfig {
  std::filesystem::path data_dir = "data";
  // Maps addressable by id (file stem).
  std::map<std::string, OccupancyGrid> maps;
  TrialConfig trial;
  BotSuite bots;
  double bot_time_limit = 600.0;
  // Tick sessions from a background thread at dt wall-clock seconds divided
  // by time_scale. When false, sessions only advance through Service::step.
  bool realtime = true;
  double time_scale = 1.0;
};

// Loads every *.map under `dir` keyed by file stem.
std::map<std::string, OccupancyGrid> load_map_directory(const std::filesystem::path& dir);

// Frames pushed to the one attached stream client.
class FrameQueue {
 public:
  void push(std::string line);
  // Waits up to `timeout` for lines; returns what is queued.
  std::vector<std::string> pop(std::chrono::milliseconds timeout);
  void close();
  bool closed() const;

 private:
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::string> lines_;
  bool closed_ = false;
};

struct CreateRequest {
  std::string map = "trial_forward";
  std::string order = "DCFirst";
  std::uint64_t seed = 0;
  std::string participant;
  bool bonus = false;
  std::string mode = "interactive";

  static CreateRequest from_json(const nlohmann::json& j);
};

// Session lifecycle behind the HTTP layer; also usable directly.
class Service {
 public:
  explicit Service(ServiceConfig cfg);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  const ServiceConfig& config() const { return cfg_; }

  // Throws ApiError UnknownMap, BadOrder, BadRequest.
  std::string create_session(const CreateRequest& req);
  std::vector<std::string> session_ids() const;
  nlohmann::json status(const std::string& id);

  // Starts the next trial; returns {"trial_index", "spec"}.
  nlohmann::json start_trial(const std::string& id);
  // Feeds line-delimited commands into the running trial.
  nlohmann::json submit_commands(const std::string& id, std::string_view body);
  // Attaches the single stream client. Throws SessionBusy, SessionComplete.
  std::shared_ptr<FrameQueue> attach_stream(const std::string& id);
  void detach_stream(const std::string& id, const std::shared_ptr<FrameQueue>& q);

  double submit_questionnaire(const std::string& id, std::size_t trial, const std::string& instrument,
                              const std::vector<int>& items);

  // Session results CSV. Throws InsufficientData (no completed trial).
  std::string results_csv(const std::string& id);
  std::string questionnaires_csv(const std::string& id);
  // Analysis report over every session stored under the data directory.
  std::string export_report() const;

  // Advances a live session by `ticks` sim steps (manual clock mode).
  void step(const std::string& id, std::size_t ticks);

 private:
  struct Live;
  std::shared_ptr<Live> find(const std::string& id);
  void tick_locked(Live& s);
  void persist_results_locked(Live& s);
  void run_clock(std::stop_token stop);
  std::string next_id();

  ServiceConfig cfg_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Live>> sessions_;
  std::uint64_t counter_ = 0;
  std::jthread clock_;
};

// Reads results.csv and questionnaires.csv of every session under
// data_dir/sessions and builds the analysis report. Throws InsufficientData.
std::string export_analysis(const std::filesystem::path& data_dir);

// Routes for the service on an httplib server.
void register_routes(httplib::Server& http, Service& service);

}  // namespace telewaypoint
