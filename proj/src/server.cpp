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

#include "telewaypoint/server.hpp"

#include <algorithm>
#include <chrono>
#include <sstream>

#include <fmt/format.h>
#include <httplib.h>

#include "telewaypoint/stats.hpp"

namespace telewaypoint {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Writes through a temporary so readers never see a half-written file.
void write_text(const fs::path& p, const std::string& text) {
  const fs::path tmp = p.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << text;
  }
  fs::rename(tmp, p);
}

}  // namespace

std::map<std::string, OccupancyGrid> load_map_directory(const fs::path& dir) {
  std::map<std::string, OccupancyGrid> maps;
  if (!fs::is_directory(dir)) return maps;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() != ".map") continue;
    maps.emplace(e.path().stem().string(), load_map_file(e.path().string()));
  }
  return maps;
}

void FrameQueue::push(std::string line) {
  {
    std::lock_guard lk(mu_);
    if (closed_) return;
    lines_.push_back(std::move(line));
  }
  cv_.notify_all();
}

std::vector<std::string> FrameQueue::pop(std::chrono::milliseconds timeout) {
  std::unique_lock lk(mu_);
  cv_.wait_for(lk, timeout, [&] { return !lines_.empty() || closed_; });
  std::vector<std::string> out(std::make_move_iterator(lines_.begin()),
                               std::make_move_iterator(lines_.end()));
  lines_.clear();
  return out;
}

void FrameQueue::close() {
  {
    std::lock_guard lk(mu_);
    closed_ = true;
  }
  cv_.notify_all();
}

bool FrameQueue::closed() const {
  std::lock_guard lk(mu_);
  return closed_;
}

CreateRequest CreateRequest::from_json(const json& j) {
  if (!j.is_object()) throw ApiError(400, "BadRequest", "expected a JSON object");
  CreateRequest r;
  try {
    r.map = j.value("map", r.map);
    r.order = j.value("order", r.order);
    r.seed = j.value("seed", r.seed);
    r.participant = j.value("participant", r.participant);
    r.bonus = j.value("bonus", r.bonus);
    r.mode = j.value("mode", r.mode);
  } catch (const json::exception& e) {
    throw ApiError(400, "BadRequest", e.what());
  }
  return r;
}

struct Service::Live {
  std::string id;
  std::string mode;
  fs::path dir;
  std::mutex mu;
  std::ofstream log_file;
  EventLog log;
  std::unique_ptr<ExperimentSession> session;
  std::shared_ptr<FrameQueue> stream;
  bool trial_open = false;
};

Service::Service(ServiceConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.trial.validate();
  if (!(cfg_.time_scale > 0.0)) throw std::invalid_argument("time scale must be > 0");
  fs::create_directories(cfg_.data_dir / "sessions");
  for (const auto& e : fs::directory_iterator(cfg_.data_dir / "sessions")) {
    const std::string name = e.path().filename().string();
    if (name.size() > 1 && name[0] == 's') {
      try {
        counter_ = std::max<std::uint64_t>(counter_, std::stoull(name.substr(1)));
      } catch (const std::exception&) {
      }
    }
  }
  if (cfg_.realtime) clock_ = std::jthread([this](std::stop_token st) { run_clock(st); });
}

Service::~Service() {
  if (clock_.joinable()) {
    clock_.request_stop();
    clock_.join();
  }
  std::lock_guard lk(mu_);
  for (auto& [id, s] : sessions_) {
    if (s->stream) s->stream->close();
  }
}

std::string Service::next_id() { return fmt::format("s{:06d}", ++counter_); }

std::string Service::create_session(const CreateRequest& req) {
  const auto map = cfg_.maps.find(req.map);
  if (map == cfg_.maps.end()) throw ApiError(404, "UnknownMap", fmt::format("no map '{}'", req.map));
  ControlOrder order;
  try {
    order = parse_order(req.order);
  } catch (const std::invalid_argument&) {
    throw ApiError(400, "BadOrder", fmt::format("order must be DCFirst or WCFirst, not '{}'", req.order));
  }
  if (req.mode != "interactive" && req.mode != "bot") {
    throw ApiError(400, "BadRequest", "mode must be interactive or bot");
  }

  auto s = std::make_shared<Live>();
  {
    std::lock_guard lk(mu_);
    s->id = next_id();
  }
  s->mode = req.mode;
  s->dir = cfg_.data_dir / "sessions" / s->id;
  fs::create_directories(s->dir);
  const std::string participant = req.participant.empty() ? s->id : req.participant;
  ExperimentPlan plan = build_plan(participant, order, req.seed, req.bonus);
  write_text(s->dir / "plan", json{{"id", s->id},
                                   {"map", req.map},
                                   {"mode", req.mode},
                                   {"plan", to_json(plan)},
                                   {"config", to_json(cfg_.trial)}}
                                  .dump(2) +
                                  "\n");
  s->log_file.open(s->dir / "events.log", std::ios::binary | std::ios::app);
  s->log.attach(&s->log_file);
  s->session = std::make_unique<ExperimentSession>(std::move(plan), map->second, cfg_.trial, &s->log);

  if (req.mode == "bot") {
    run_bot_session(*s->session, cfg_.bots, cfg_.bot_time_limit);
    s->log_file.flush();
    persist_results_locked(*s);
  }
  std::lock_guard lk(mu_);
  sessions_.emplace(s->id, s);
  return s->id;
}

std::vector<std::string> Service::session_ids() const {
  std::lock_guard lk(mu_);
  std::vector<std::string> ids;
  for (const auto& [id, s] : sessions_) ids.push_back(id);
  return ids;
}

std::shared_ptr<Service::Live> Service::find(const std::string& id) {
  std::lock_guard lk(mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw ApiError(404, "SessionNotFound", fmt::format("no session '{}'", id));
  return it->second;
}

json Service::status(const std::string& id) {
  auto s = find(id);
  std::lock_guard lk(s->mu);
  const ExperimentSession& es = *s->session;
  json j{{"id", s->id},
         {"mode", s->mode},
         {"plan", to_json(es.plan())},
         {"trials_started", es.trials_started()},
         {"trials_completed", es.results().size()},
         {"plan_complete", es.plan_complete()},
         {"streaming", static_cast<bool>(s->stream)}};
  if (TrialSession* t = s->session->current_trial(); t && s->trial_open) {
    j["current_trial"] = {{"index", es.trials_started() - 1},
                          {"phase", to_string(t->phase())},
                          {"time", to_seconds(t->now())}};
  }
  json results = json::array();
  for (const auto& r : es.results()) results.push_back(to_json(r));
  j["results"] = results;
  return j;
}

json Service::start_trial(const std::string& id) {
  auto s = find(id);
  std::lock_guard lk(s->mu);
  ExperimentSession& es = *s->session;
  if (es.plan_complete()) throw ApiError(410, "SessionComplete", "every planned trial has run");
  if (s->trial_open) throw ApiError(409, "TrialIncomplete", "the current trial has not finished");
  TrialSession& t = es.start_next_trial();
  s->trial_open = true;
  s->log_file.flush();
  return {{"trial_index", es.trials_started() - 1}, {"spec", to_json(t.spec())}};
}

json Service::submit_commands(const std::string& id, std::string_view body) {
  auto s = find(id);
  std::lock_guard lk(s->mu);
  TrialSession* t = s->session->current_trial();
  if (!t || !s->trial_open || t->finished()) {
    throw ApiError(409, "NoActiveTrial", "no trial is running");
  }
  std::size_t accepted = 0;
  json rejected = json::array();
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= body.size()) {
    std::size_t end = body.find('\n', pos);
    if (end == std::string_view::npos) end = body.size();
    std::string_view line = body.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      t->receive_line(line);
      ++accepted;
    } catch (const std::exception& e) {
      rejected.push_back({{"line", line_no}, {"error", e.what()}});
    }
  }
  s->log_file.flush();
  return {{"accepted", accepted}, {"rejected", rejected}};
}

std::shared_ptr<FrameQueue> Service::attach_stream(const std::string& id) {
  auto s = find(id);
  std::lock_guard lk(s->mu);
  if (s->session->plan_complete()) throw ApiError(410, "SessionComplete", "the session is over");
  if (s->stream) throw ApiError(409, "SessionBusy", "a stream is already attached");
  s->stream = std::make_shared<FrameQueue>();
  return s->stream;
}

void Service::detach_stream(const std::string& id, const std::shared_ptr<FrameQueue>& q) {
  auto s = find(id);
  std::lock_guard lk(s->mu);
  if (s->stream == q) s->stream.reset();
}

double Service::submit_questionnaire(const std::string& id, std::size_t trial,
                                     const std::string& instrument, const std::vector<int>& items) {
  auto s = find(id);
  std::lock_guard lk(s->mu);
  Instrument inst;
  try {
    inst = parse_instrument(instrument);
  } catch (const std::invalid_argument& e) {
    throw ApiError(400, "BadRequest", e.what());
  }
  double score = 0.0;
  try {
    score = s->session->submit_questionnaire(trial, inst, items);
  } catch (const TrialIncomplete& e) {
    throw ApiError(409, "TrialIncomplete", e.what());
  } catch (const DuplicateSubmission& e) {
    throw ApiError(409, "DuplicateSubmission", e.what());
  } catch (const OutOfRangeItem& e) {
    throw ApiError(422, "OutOfRangeItem", e.what());
  } catch (const std::out_of_range& e) {
    throw ApiError(404, "UnknownTrial", e.what());
  }
  write_text(s->dir / "questionnaires.csv",
             questionnaire_csv_header() +
                 questionnaire_csv_rows(s->session->plan(), s->session->questionnaires()));
  return score;
}

std::string Service::results_csv(const std::string& id) {
  auto s = find(id);
  std::lock_guard lk(s->mu);
  const auto& results = s->session->results();
  if (std::none_of(results.begin(), results.end(), [](const TrialResult& r) { return r.completed; })) {
    throw ApiError(422, "InsufficientData", "no trial has been completed");
  }
  return telewaypoint::results_csv(s->session->plan(), results);
}

std::string Service::questionnaires_csv(const std::string& id) {
  auto s = find(id);
  std::lock_guard lk(s->mu);
  return questionnaire_csv_header() +
         questionnaire_csv_rows(s->session->plan(), s->session->questionnaires());
}

std::string Service::export_report() const {
  try {
    return export_analysis(cfg_.data_dir);
  } catch (const InsufficientData& e) {
    throw ApiError(422, "InsufficientData", e.what());
  }
}

void Service::persist_results_locked(Live& s) {
  write_text(s.dir / "results.csv",
             telewaypoint::results_csv(s.session->plan(), s.session->results()));
  write_text(s.dir / "questionnaires.csv",
             questionnaire_csv_header() +
                 questionnaire_csv_rows(s.session->plan(), s.session->questionnaires()));
}

void Service::tick_locked(Live& s) {
  TrialSession* t = s.session->current_trial();
  if (!t || !s.trial_open) return;
  t->tick();
  for (const StateFrame& f : t->poll_frames()) {
    if (s.stream) s.stream->push(encode_frame(f));
  }
  if (t->drained()) {
    s.session->conclude_trial();
    s.trial_open = false;
    persist_results_locked(s);
    if (s.session->plan_complete() && s.stream) s.stream->close();
  }
  s.log_file.flush();
}

void Service::step(const std::string& id, std::size_t ticks) {
  auto s = find(id);
  std::lock_guard lk(s->mu);
  for (std::size_t i = 0; i < ticks; ++i) tick_locked(*s);
}

void Service::run_clock(std::stop_token stop) {
  using clock = std::chrono::steady_clock;
  const auto period = std::chrono::duration_cast<clock::duration>(
      std::chrono::duration<double>(cfg_.trial.sim.dt / cfg_.time_scale));
  auto next = clock::now() + period;
  while (!stop.stop_requested()) {
    std::this_thread::sleep_until(next);
    next += period;
    std::vector<std::shared_ptr<Live>> live;
    {
      std::lock_guard lk(mu_);
      for (const auto& [id, s] : sessions_) live.push_back(s);
    }
    for (const auto& s : live) {
      std::lock_guard lk(s->mu);
      tick_locked(*s);
    }
  }
}

std::string export_analysis(const fs::path& data_dir) {
  std::vector<ResultRow> results;
  std::vector<QuestionnaireRow> questionnaires;
  const fs::path root = data_dir / "sessions";
  if (fs::is_directory(root)) {
    std::vector<fs::path> dirs;
    for (const auto& e : fs::directory_iterator(root)) {
      if (e.is_directory()) dirs.push_back(e.path());
    }
    std::sort(dirs.begin(), dirs.end());
    for (const auto& d : dirs) {
      if (fs::exists(d / "results.csv")) {
        auto rows = parse_results_csv(read_text(d / "results.csv"));
        results.insert(results.end(), rows.begin(), rows.end());
      }
      if (fs::exists(d / "questionnaires.csv")) {
        auto rows = parse_questionnaire_csv(read_text(d / "questionnaires.csv"));
        questionnaires.insert(questionnaires.end(), rows.begin(), rows.end());
      }
    }
  }
  return analysis_report(build_datasets(results, questionnaires));
}

namespace {

void send_error(httplib::Response& res, const ApiError& e) {
  res.status = e.status();
  res.set_content(json{{"error", e.code()}, {"message", e.what()}}.dump() + "\n", "application/json");
}

void send_json(httplib::Response& res, const json& j, int status = 200) {
  res.status = status;
  res.set_content(j.dump() + "\n", "application/json");
}

template <typename F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const ApiError& e) {
      send_error(res, e);
    } catch (const json::exception& e) {
      send_error(res, ApiError(400, "BadRequest", e.what()));
    } catch (const std::exception& e) {
      send_error(res, ApiError(500, "Internal", e.what()));
    }
  };
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    return json::parse(req.body);
  } catch (const json::parse_error& e) {
    throw ApiError(400, "BadRequest", e.what());
  }
}

}  // namespace

void register_routes(httplib::Server& http, Service& service) {
  http.Get("/health", guarded([](const httplib::Request&, httplib::Response& res) {
             send_json(res, {{"status", "ok"}});
           }));
  http.Get("/maps", guarded([&service](const httplib::Request&, httplib::Response& res) {
             json ids = json::array();
             for (const auto& [id, m] : service.config().maps) ids.push_back(id);
             send_json(res, {{"maps", ids}});
           }));
  http.Post("/sessions", guarded([&service](const httplib::Request& req, httplib::Response& res) {
              const std::string id = service.create_session(CreateRequest::from_json(parse_body(req)));
              send_json(res, service.status(id), 201);
            }));
  http.Get("/sessions", guarded([&service](const httplib::Request&, httplib::Response& res) {
             send_json(res, {{"sessions", service.session_ids()}});
           }));
  http.Get(R"(/sessions/([\w-]+))",
           guarded([&service](const httplib::Request& req, httplib::Response& res) {
             send_json(res, service.status(req.matches[1]));
           }));
  http.Post(R"(/sessions/([\w-]+)/trials)",
            guarded([&service](const httplib::Request& req, httplib::Response& res) {
              send_json(res, service.start_trial(req.matches[1]), 201);
            }));
  http.Post(R"(/sessions/([\w-]+)/commands)",
            guarded([&service](const httplib::Request& req, httplib::Response& res) {
              send_json(res, service.submit_commands(req.matches[1], req.body));
            }));
  http.Post(R"(/sessions/([\w-]+)/questionnaires)",
            guarded([&service](const httplib::Request& req, httplib::Response& res) {
              const json j = parse_body(req);
              const double score = service.submit_questionnaire(
                  req.matches[1], j.at("trial").get<std::size_t>(),
                  j.at("instrument").get<std::string>(), j.at("items").get<std::vector<int>>());
              send_json(res, {{"score", score}}, 201);
            }));
  http.Get(R"(/sessions/([\w-]+)/results\.csv)",
           guarded([&service](const httplib::Request& req, httplib::Response& res) {
             res.set_content(service.results_csv(req.matches[1]), "text/csv");
           }));
  http.Get(R"(/sessions/([\w-]+)/questionnaires\.csv)",
           guarded([&service](const httplib::Request& req, httplib::Response& res) {
             res.set_content(service.questionnaires_csv(req.matches[1]), "text/csv");
           }));
  http.Get("/export", guarded([&service](const httplib::Request&, httplib::Response& res) {
             res.set_content(service.export_report(), "text/csv");
           }));
  http.Get(R"(/sessions/([\w-]+)/stream)",
           guarded([&service](const httplib::Request& req, httplib::Response& res) {
             const std::string id = req.matches[1];
             auto queue = service.attach_stream(id);
             res.set_chunked_content_provider(
                 "application/x-ndjson",
                 [queue](std::size_t, httplib::DataSink& sink) {
                   for (const std::string& line : queue->pop(std::chrono::milliseconds(100))) {
                     const std::string out = line + "\n";
                     if (!sink.write(out.data(), out.size())) return false;
                   }
                   if (queue->closed()) {
                     for (const std::string& line : queue->pop(std::chrono::milliseconds(0))) {
                       const std::string out = line + "\n";
                       if (!sink.write(out.data(), out.size())) return false;
                     }
                     sink.done();
                   }
                   return true;
                 },
                 [&service, id, queue](bool) {
                   try {
                     service.detach_stream(id, queue);
                   } catch (const ApiError&) {
                   }
                 });
           }));
}

}  // namespace telewaypoint
