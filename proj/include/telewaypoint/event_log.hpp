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

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "telewaypoint/channel.hpp"

namespace telewaypoint {

// Record kinds.
namespace log_kind {
inline constexpr std::string_view kTrialStart = "trial-start";
inline constexpr std::string_view kCommand = "command";
inline constexpr std::string_view kStimulus = "stimulus";
inline constexpr std::string_view kResponse = "response";
inline constexpr std::string_view kDelayChange = "delay-change";
inline constexpr std::string_view kMethodSwitch = "method-switch";
inline constexpr std::string_view kCheckpoint = "state-checkpoint";
inline constexpr std::string_view kTrialEnd = "trial-end";
}  // namespace log_kind

struct LogRecord {
  SimTime t{0};
  std::string kind;
  nlohmann::json data;
};

class EventLogError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Append-only, line-delimited log: one {"t", "kind", "data"} object per line.
// Timestamps are non-decreasing within a trial; each trial restarts its clock
// at a trial-start record.
class EventLog {
 public:
  EventLog() = default;

  void append(SimTime t, std::string_view kind, nlohmann::json data);
  const std::vector<LogRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }

  // Optional sink that receives each serialized line as it is appended.
  void attach(std::ostream* sink) { sink_ = sink; }

  static std::string encode(const LogRecord& r);
  static LogRecord decode(std::string_view line);
  static EventLog parse(std::string_view text);
  static EventLog read_file(const std::string& path);

  std::string to_string() const;

 private:
  std::vector<LogRecord> records_;
  std::ostream* sink_ = nullptr;
};

}  // namespace telewaypoint
