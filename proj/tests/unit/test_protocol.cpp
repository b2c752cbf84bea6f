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

#include <random>

#include "telewaypoint/protocol.hpp"

using namespace telewaypoint;

TEST(Plan, DirectFirstOrder) {
  const ExperimentPlan p = build_plan("p01", ControlOrder::DCFirst, 7);
  ASSERT_EQ(p.trials.size(), 4u);
  const TrialSpec expected[] = {
      {ControlMethod::Direct, 0.0, MapVariant::Forward, false},
      {ControlMethod::Direct, 1.0, MapVariant::Reverse, false},
      {ControlMethod::Waypoint, 0.0, MapVariant::ForwardMirrored, false},
      {ControlMethod::Waypoint, 1.0, MapVariant::ReverseMirrored, false},
  };
  for (int i = 0; i < 4; ++i) EXPECT_EQ(p.trials[i], expected[i]) << i;
  EXPECT_NO_THROW(validate_plan(p));
}

TEST(Plan, WaypointFirstOrderWithBonus) {
  const ExperimentPlan p = build_plan("p02", ControlOrder::WCFirst, 7, true);
  ASSERT_EQ(p.trials.size(), 5u);
  EXPECT_EQ(p.trials[0].control, ControlMethod::Waypoint);
  EXPECT_EQ(p.trials[2].control, ControlMethod::Direct);
  EXPECT_TRUE(p.trials[4].bonus);
  EXPECT_EQ(p.trials[4].control, ControlMethod::Switchable);
  EXPECT_EQ(p.trials[4].map_variant, MapVariant::Bonus);
  EXPECT_NO_THROW(validate_plan(p));
}

TEST(Plan, ValidateRejectsBrokenPlans) {
  const ExperimentPlan good = build_plan("p", ControlOrder::DCFirst, 1, true);
  auto broken = [&](auto&& edit) {
    ExperimentPlan p = good;
    edit(p);
    return p;
  };
  EXPECT_THROW(validate_plan(broken([](auto& p) { std::swap(p.trials[0], p.trials[1]); })),
               std::invalid_argument);
  EXPECT_THROW(validate_plan(broken([](auto& p) { p.order = ControlOrder::WCFirst; })),
               std::invalid_argument);
  EXPECT_THROW(validate_plan(broken([](auto& p) { p.trials[2].map_variant = MapVariant::Forward; })),
               std::invalid_argument);
  EXPECT_THROW(validate_plan(broken([](auto& p) { p.trials.pop_back(); p.trials.pop_back(); })),
               std::invalid_argument);
  EXPECT_THROW(validate_plan(broken([](auto& p) { p.trials[4].bonus = false; })), std::invalid_argument);
  EXPECT_THROW(validate_plan(broken([](auto& p) { p.trials[1].delay = 0.5; })), std::invalid_argument);
}

TEST(Plan, InvariantsForBothOrders) {
  for (auto order : {ControlOrder::DCFirst, ControlOrder::WCFirst}) {
    for (bool bonus : {false, true}) {
      const ExperimentPlan p = build_plan("x", order, 3, bonus);
      int undelayed = 0;
      int delayed = 0;
      for (std::size_t i = 0; i < 4; ++i) {
        (p.trials[i].delay == 0.0 ? undelayed : delayed)++;
        if (i % 2 == 1) {
          EXPECT_EQ(p.trials[i].control, p.trials[i - 1].control);
          EXPECT_EQ(p.trials[i - 1].delay, 0.0);
        }
      }
      EXPECT_EQ(undelayed, 2);
      EXPECT_EQ(delayed, 2);
      EXPECT_NE(p.trials[0].control, p.trials[2].control);
    }
  }
}

TEST(Plan, TrialSeedsDiffer) {
  EXPECT_NE(trial_seed(1, 0), trial_seed(1, 1));
  EXPECT_NE(trial_seed(1, 0), trial_seed(2, 0));
  EXPECT_EQ(trial_seed(5, 3), trial_seed(5, 3));
}

TEST(Names, RoundTrip) {
  for (auto v : {MapVariant::Forward, MapVariant::Reverse, MapVariant::ForwardMirrored,
                 MapVariant::ReverseMirrored, MapVariant::Bonus})
    EXPECT_EQ(parse_variant(to_string(v)), v);
  for (auto m : {ControlMethod::Direct, ControlMethod::Waypoint, ControlMethod::Switchable})
    EXPECT_EQ(parse_method(to_string(m)), m);
  EXPECT_EQ(parse_order("WCFirst"), ControlOrder::WCFirst);
  EXPECT_THROW(parse_order("XYFirst"), std::invalid_argument);
  EXPECT_THROW(parse_arrow("up"), std::invalid_argument);
}

TEST(Stimuli, EightySecondTrial) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto s = schedule_stimuli(80.0, seed);
    ASSERT_GE(s.size(), 8u);
    ASSERT_LE(s.size(), 11u);
    ASSERT_GE(s[0].spawn_time, 7.0);
    ASSERT_LE(s[0].spawn_time, 9.0);
    for (std::size_t i = 1; i < s.size(); ++i) {
      const double gap = s[i].spawn_time - s[i - 1].spawn_time;
      ASSERT_GE(gap, 7.0);
      ASSERT_LE(gap, 9.0);
      ASSERT_EQ(s[i].id, s[i - 1].id + 1);
    }
    ASSERT_LE(s.back().spawn_time, 80.0);
  }
}

TEST(Stimuli, DeterministicAndBothDirections) {
  EXPECT_EQ(schedule_stimuli(500.0, 4).size(), schedule_stimuli(500.0, 4).size());
  int left = 0;
  int right = 0;
  for (const auto& e : schedule_stimuli(5000.0, 9)) (e.direction == Arrow::Left ? left : right)++;
  EXPECT_GT(left, 200);
  EXPECT_GT(right, 200);
  EXPECT_THROW(schedule_stimuli(0.0, 1), std::invalid_argument);
}

TEST(Stimuli, RecordResponse) {
  StimulusEvent e;
  e.direction = Arrow::Right;
  e.spawn_time = 10.0;
  const StimulusEvent r = record_response(e, Arrow::Right, 10.8);
  EXPECT_DOUBLE_EQ(*r.response_time, 10.8);
  EXPECT_TRUE(*r.correct);
  EXPECT_FALSE(*record_response(e, Arrow::Left, 11.0).correct);
  EXPECT_THROW(record_response(r, Arrow::Right, 12.0), AlreadyAnswered);
  EXPECT_THROW(record_response(e, Arrow::Right, 9.0), std::invalid_argument);
}

TEST(Result, MeanResponseTime) {
  TrialResult r;
  EXPECT_FALSE(r.mean_response_time());
  StimulusEvent a;
  a.spawn_time = 1.0;
  a.response_time = 2.0;
  StimulusEvent b;
  b.spawn_time = 5.0;
  b.response_time = 5.5;
  StimulusEvent unanswered;
  r.responses = {a, b, unanswered};
  EXPECT_DOUBLE_EQ(*r.mean_response_time(), 0.75);
}

TEST(Result, UsagePercentSumsToHundred) {
  TrialResult r;
  EXPECT_FALSE(r.usage_percent(ControlMethod::Direct));
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  for (int i = 0; i < 1000; ++i) {
    r.usage_seconds = {{ControlMethod::Direct, u(rng)}, {ControlMethod::Waypoint, u(rng)}};
    const double sum = *r.usage_percent(ControlMethod::Direct) + *r.usage_percent(ControlMethod::Waypoint);
    ASSERT_NEAR(sum, 100.0, 1e-9);
  }
  r.usage_seconds = {{ControlMethod::Waypoint, 3.0}};
  EXPECT_EQ(*r.usage_percent(ControlMethod::Direct), 0.0);
  EXPECT_EQ(*r.usage_percent(ControlMethod::Waypoint), 100.0);
}
