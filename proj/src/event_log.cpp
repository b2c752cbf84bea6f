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

#include "telewaypoint/event_log.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

namespace telewaypoint {

void EventLog::append(SimTime t, std::string_view kind, nlohmann::json data) {
  if (!records_.empty() && kind != log_kind::kTrialStart && t < records_.back().t) {
    throw EventLogError("event log timestamps must be non-decreasing");
  }
  records_.push_back({t, std::string(kind), std::move(data)});
  if (sink_) {
    *sink_ << encode(records_.back()) << '\n';
    sink_->flush();
  }
}

std::string EventLog::encode(const LogRecord& r) {
  nlohmann::json j;
  j["t"] = to_seconds(r.t);
  j["kind"] = r.kind;
  j["data"] = r.data;
  return j.dump();
}

LogRecord EventLog::decode(std::string_view line) {
  auto j = nlohmann::json::parse(line.begin(), line.end(), nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("t") || !j["t"].is_number() ||
      !j.contains("kind") || !j["kind"].is_string() || !j.contains("data")) {
    throw EventLogError("malformed event log line: " + std::string(line));
  }
  return {from_seconds(j["t"].get<double>()), j["kind"].get<std::string>(), j["data"]};
}

EventLog EventLog::parse(std::string_view text) {
  EventLog log;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const std::string_view line = text.substr(pos, nl - pos);
    if (!line.empty()) {
      LogRecord r = decode(line);
      log.append(r.t, r.kind, std::move(r.data));
    }
    pos = nl + 1;
  }
  return log;
}

EventLog EventLog::read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw EventLogError("cannot open event log: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string EventLog::to_string() const {
  std::string out;
  for (const auto& r : records_) {
    out += encode(r);
    out += '\n';
  }
  return out;
}

}  // namespace telewaypoint
