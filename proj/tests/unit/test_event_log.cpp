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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "telewaypoint/event_log.hpp"

using namespace telewaypoint;

TEST(EventLog, EncodeDecodeRoundTrip) {
  EventLog log;
  log.append(from_seconds(0.0), log_kind::kTrialStart, {{"trial", 0}});
  log.append(from_seconds(0.02), log_kind::kCommand, {{"kind", "drive"}, {"y", 1.0}, {"x", 0.0}});
  log.append(from_seconds(0.02), log_kind::kStimulus, {{"id", 0}});
  log.append(from_seconds(5.5), log_kind::kTrialEnd, {{"completed", true}});
  const EventLog back = EventLog::parse(log.to_string());
  ASSERT_EQ(back.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(back.records()[i].t, log.records()[i].t);
    EXPECT_EQ(back.records()[i].kind, log.records()[i].kind);
    EXPECT_EQ(back.records()[i].data, log.records()[i].data);
  }
  EXPECT_EQ(back.to_string(), log.to_string());
}

TEST(EventLog, TimestampsMonotoneWithinTrial) {
  EventLog log;
  log.append(from_seconds(1.0), log_kind::kTrialStart, {});
  log.append(from_seconds(2.0), log_kind::kCommand, {});
  EXPECT_THROW(log.append(from_seconds(1.5), log_kind::kCommand, {}), EventLogError);
  // A new trial restarts the clock.
  EXPECT_NO_THROW(log.append(from_seconds(0.0), log_kind::kTrialStart, {}));
}

TEST(EventLog, MalformedLines) {
  EXPECT_THROW(EventLog::decode("{"), EventLogError);
  EXPECT_THROW(EventLog::decode(R"({"t":1,"kind":"x"})"), EventLogError);
  EXPECT_THROW(EventLog::decode(R"({"t":"1","kind":"x","data":{}})"), EventLogError);
}

TEST(EventLog, SinkReceivesLines) {
  std::ostringstream out;
  EventLog log;
  log.attach(&out);
  log.append(from_seconds(0.0), log_kind::kTrialStart, {{"a", 1}});
  log.append(from_seconds(1.0), log_kind::kTrialEnd, {});
  EXPECT_EQ(out.str(), log.to_string());
}

TEST(EventLog, ReadFile) {
  const auto path = std::filesystem::temp_directory_path() / "twp_event_log_test.log";
  EventLog log;
  log.append(from_seconds(0.0), log_kind::kTrialStart, {});
  log.append(from_seconds(0.04), log_kind::kDelayChange, {{"up", 1.0}});
  {
    std::ofstream f(path);
    f << log.to_string();
  }
  EXPECT_EQ(EventLog::read_file(path.string()).to_string(), log.to_string());
  std::filesystem::remove(path);
  EXPECT_THROW(EventLog::read_file(path.string()), EventLogError);
}
