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

// Command-line entry point: HTTP server, headless bot runs, and export.

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <httplib.h>

#include "telewaypoint/server.hpp"
#include "telewaypoint/stats.hpp"

#ifndef TELEWAYPOINT_ASSET_DIR
#define TELEWAYPOINT_ASSET_DIR "assets"
#endif

namespace fs = std::filesystem;
using namespace telewaypoint;

namespace {

httplib::Server* g_http = nullptr;

void on_signal(int) {
  if (g_http) g_http->stop();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Teleoperation trial server and bot runner"};

  int port = 8080;
  std::string host = "127.0.0.1";
  std::string data_dir = "data";
  std::string map_file;
  std::uint64_t seed = 1;
  bool headless = false;
  std::size_t bot_runs = 0;
  std::optional<double> delay_up;
  std::optional<double> delay_down;
  std::string export_path;
  double time_scale = 1.0;
  bool bonus = true;

  app.add_option("--port", port, "HTTP port")->check(CLI::Range(0, 65535));
  app.add_option("--host", host, "Address to bind");
  app.add_option("--data-dir", data_dir, "Session storage (TELEWAYPOINT_DATA_DIR overrides)");
  app.add_option("--map", map_file, "Map file; its stem becomes the default map id")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Base seed for plans and bots");
  app.add_flag("--headless", headless, "Run without serving HTTP");
  app.add_option("--bot-experiment", bot_runs, "Number of bot sessions to run headless");
  app.add_option("--delay-up", delay_up, "Uplink delay (s) in delayed conditions")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--delay-down", delay_down, "Downlink delay (s) in delayed conditions")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--export", export_path, "Write the analysis report of all stored sessions");
  app.add_option("--time-scale", time_scale, "Sim seconds per wall second when serving")
      ->check(CLI::PositiveNumber);
  app.add_flag("!--no-bonus", bonus, "Leave out the bonus trial in bot sessions");
  CLI11_PARSE(app, argc, argv);

  if (const char* env = std::getenv("TELEWAYPOINT_DATA_DIR"); env && *env) data_dir = env;

  try {
    ServiceConfig cfg;
    cfg.data_dir = data_dir;
    cfg.maps = load_map_directory(fs::path(TELEWAYPOINT_ASSET_DIR) / "maps");
    for (auto& [id, m] : load_map_directory(fs::path(data_dir) / "maps")) cfg.maps.insert_or_assign(id, m);
    std::string default_map = "trial_forward";
    if (!map_file.empty()) {
      default_map = fs::path(map_file).stem().string();
      cfg.maps.insert_or_assign(default_map, load_map_file(map_file));
    }
    if (delay_up || delay_down) {
      cfg.trial.delayed_links = ChannelConfig{delay_up.value_or(kDelayedCondition), delay_down.value_or(0.0)};
    }
    cfg.time_scale = time_scale;

    if (headless || bot_runs > 0) {
      if (bot_runs == 0 && export_path.empty()) {
        std::cerr << "--headless needs --bot-experiment or --export\n";
        return 2;
      }
      cfg.realtime = false;
      Service service(cfg);
      bool header = true;
      for (std::size_t i = 0; i < bot_runs; ++i) {
        CreateRequest req;
        req.map = default_map;
        req.order = i % 2 == 0 ? "DCFirst" : "WCFirst";
        req.seed = seed + i;
        req.participant = fmt::format("bot{:03d}", i + 1);
        req.bonus = bonus;
        req.mode = "bot";
        const std::string id = service.create_session(req);
        std::string csv = service.results_csv(id);
        if (!header) csv.erase(0, csv.find('\n') + 1);
        header = false;
        std::cout << csv;
      }
      if (!export_path.empty()) write_file(export_path, export_analysis(data_dir));
      return 0;
    }

    if (!export_path.empty()) {
      write_file(export_path, export_analysis(data_dir));
      return 0;
    }

    Service service(cfg);
    httplib::Server http;
    register_routes(http, service);
    g_http = &http;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::cerr << fmt::format("listening on {}:{}, data in {}\n", host, port, data_dir);
    if (!http.listen(host, port)) {
      std::cerr << fmt::format("cannot listen on {}:{}\n", host, port);
      return 1;
    }
    return 0;
  } catch (const InsufficientData& e) {
    std::cerr << "insufficient data: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
