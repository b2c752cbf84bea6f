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

#include "telewaypoint/bots.hpp"
#include "telewaypoint/session.hpp"

using namespace telewaypoint;

namespace {

OccupancyGrid forward_map() {
  return load_map_file(std::string(TELEWAYPOINT_ASSET_DIR) + "/maps/trial_forward.map");
}

TrialSpec direct_spec(double delay) { return {ControlMethod::Direct, delay, MapVariant::Forward, false}; }
TrialSpec bonus_spec() { return {ControlMethod::Switchable, 1.0, MapVariant::Bonus, true}; }

std::size_t count_kind(const EventLog& log, std::string_view kind) {
  std::size_t n = 0;
  for (const auto& r : log.records()) n += r.kind == kind;
  return n;
}

}  // namespace

TEST(TrialSession, DriveTakesEffectAfterUplinkDelay) {
  TrialSession s(forward_map(), direct_spec(1.0), TrialConfig{}, 1);
  s.receive(cmd::Drive{{1.0, 0.0}});
  for (int i = 1; i < 50; ++i) {
    s.tick();
    ASSERT_EQ(s.robot().linear_vel, 0.0) << i;
  }
  s.tick();
  EXPECT_GT(s.robot().linear_vel, 0.0);
  EXPECT_EQ(s.now(), from_seconds(1.0));
}

TEST(TrialSession, UndelayedDriveActsNextTick) {
  TrialSession s(forward_map(), direct_spec(0.0), TrialConfig{}, 1);
  s.receive(cmd::Drive{{1.0, 0.0}});
  s.tick();
  EXPECT_GT(s.robot().linear_vel, 0.0);
}

TEST(TrialSession, StopGripZeroesVelocity) {
  TrialSession s(forward_map(), direct_spec(0.0), TrialConfig{}, 1);
  s.receive(cmd::Drive{{1.0, 0.0}});
  for (int i = 0; i < 5; ++i) s.tick();
  s.receive(cmd::StopGrip{});
  s.tick();
  EXPECT_EQ(s.robot().linear_vel, 0.0);
  EXPECT_EQ(s.robot().angular_vel, 0.0);
}

TEST(TrialSession, WaypointCommandsIgnoredUnderDirect) {
  TrialSession s(forward_map(), direct_spec(0.0), TrialConfig{}, 1);
  s.receive(cmd::AimBegin{});
  const StateFrame& f = s.tick();
  EXPECT_EQ(f.selection_mode, SelectionMode::Idle);
  ASSERT_EQ(f.notices.size(), 1u);
}

TEST(TrialSession, SwitchOutsideBonusRejected) {
  TrialSession s(forward_map(), direct_spec(0.0), TrialConfig{}, 1);
  EXPECT_THROW(s.receive(cmd::SwitchMethod{ControlMethod::Waypoint}), NotBonusTrial);
}

TEST(TrialSession, WaypointConfirmPlansAndNavigates) {
  const OccupancyGrid map = forward_map();
  TrialSession s(map, {ControlMethod::Waypoint, 0.0, MapVariant::Forward, false}, TrialConfig{}, 1);
  const Pose2D start = map.start_pose();
  const Vec3 hand{start.x, start.y, 1.2};
  // Longest straight-ahead throw that lands on a free cell.
  std::optional<ControllerPose> aim;
  for (double range = 4.0; range > 0.5 && !aim; range -= 0.25) {
    const auto pitch = pitch_for_range(range, TrialConfig{}.arc);
    const ControllerPose pose = ControllerPose::aimed(hand, start.theta, *pitch);
    if (arc_project(pose, s.costmap(), TrialConfig{}.arc)) aim = pose;
  }
  ASSERT_TRUE(aim);
  s.receive(cmd::AimBegin{});
  s.receive(cmd::AimUpdate{*aim});
  s.receive(cmd::AimRelease{});
  s.receive(cmd::Confirm{});
  const StateFrame f = s.tick();
  EXPECT_TRUE(f.navigating);
  EXPECT_EQ(f.selection_mode, SelectionMode::Navigating);
  ASSERT_TRUE(f.confirmed_target);
  for (int i = 0; i < 1000 && s.path(); ++i) s.tick();
  EXPECT_FALSE(s.path());
  EXPECT_EQ(s.selection().mode(), SelectionMode::Idle);
  EXPECT_LE(distance(s.robot().pose.position(), *f.confirmed_target), TrialConfig{}.pursuit.arrive_tolerance);
}

TEST(TrialSession, StimulusAckInNextFrame) {
  TrialSession s(forward_map(), direct_spec(1.0), TrialConfig{}, 3);
  while (s.last_frame().active_stimuli.empty()) s.tick();
  const StimulusView v = s.last_frame().active_stimuli.front();
  EXPECT_GE(v.spawn_time, 7.0);
  EXPECT_LE(v.spawn_time, 9.02);
  for (int i = 0; i < 10; ++i) s.tick();
  s.receive(cmd::StimulusResponse{v.direction, std::nullopt});
  const StateFrame& f = s.tick();
  ASSERT_EQ(f.acks.size(), 1u);
  EXPECT_EQ(f.acks[0].stimulus_id, v.id);
  EXPECT_TRUE(f.acks[0].correct);
  // Timed on receipt, not after the uplink delay.
  EXPECT_NEAR(f.acks[0].response_time, 0.2, 1e-9);
  EXPECT_TRUE(f.active_stimuli.empty());
  EXPECT_TRUE(s.tick().acks.empty());
  EXPECT_THROW(s.receive(cmd::StimulusResponse{v.direction, v.id}), AlreadyAnswered);
}

TEST(TrialSession, DownlinkDelaysFrames) {
  TrialConfig cfg;
  cfg.delayed_links = ChannelConfig{0.5, 0.5};
  TrialSession s(forward_map(), direct_spec(1.0), cfg, 1);
  for (int i = 0; i < 25; ++i) {
    s.tick();
    ASSERT_TRUE(s.poll_frames().empty());
  }
  s.tick();
  const auto frames = s.poll_frames();
  ASSERT_EQ(frames.size(), 1u);
  EXPECT_EQ(frames[0].tick, 1);
}

TEST(TrialSession, TickGridEnforced) {
  TrialSession s(forward_map(), direct_spec(0.0), TrialConfig{}, 1);
  EXPECT_THROW(s.tick(from_seconds(0.03)), std::invalid_argument);
  EXPECT_NO_THROW(s.tick(from_seconds(0.02)));
}

TEST(TrialSession, AbortAndTimeout) {
  TrialSession s(forward_map(), direct_spec(0.0), TrialConfig{}, 1);
  s.abort();
  EXPECT_EQ(s.phase(), TrialPhase::Aborted);
  EXPECT_THROW(s.receive(cmd::StopGrip{}), TrialOver);
  EXPECT_THROW(s.abort(), TrialOver);

  TrialConfig cfg;
  cfg.max_duration = 1.0;
  TrialSession t(forward_map(), direct_spec(0.0), cfg, 1);
  for (int i = 0; i < 60 && !t.finished(); ++i) t.tick();
  EXPECT_EQ(t.phase(), TrialPhase::Aborted);
  EXPECT_FALSE(t.result().completed);
}

TEST(TrialSession, BonusOnsetFiresOnceAndUsageSumsToHundred) {
  const OccupancyGrid map = forward_map();
  EventLog log;
  TrialSession s(map, bonus_spec(), TrialConfig{}, 5, &log);
  EXPECT_EQ(s.active_method(), ControlMethod::Direct);
  EXPECT_EQ(s.uplink_delay(), SimTime::zero());
  Bot bot(BotConfig{BotKind::Switching}, map, TrialConfig{}, 5);
  int onsets = 0;
  // Count onsets in the frames the operator actually receives.
  const TrialResult r = [&] {
    TrialResult out;
    while (!s.drained() && s.now() < from_seconds(600.0)) {
      for (const auto& f : s.poll_frames()) {
        onsets += f.delay_onset;
        bot.observe(f);
      }
      if (!s.finished()) {
        for (const auto& c : bot.act(s.now())) {
          try {
            s.receive_line(encode_command(c));
          } catch (const std::exception&) {
            bot.refused(c);
          }
        }
      }
      s.tick();
    }
    out = s.result();
    return out;
  }();
  ASSERT_TRUE(r.completed);
  EXPECT_TRUE(s.delay_onset_fired());
  EXPECT_EQ(onsets, 1);
  EXPECT_EQ(count_kind(log, log_kind::kDelayChange), 1u);
  EXPECT_EQ(s.uplink_delay(), from_seconds(1.0));
  const double sum = *r.usage_percent(ControlMethod::Direct) + *r.usage_percent(ControlMethod::Waypoint);
  EXPECT_NEAR(sum, 100.0, 1e-9);
  EXPECT_GT(*r.usage_percent(ControlMethod::Waypoint), 0.0);
}

TEST(TrialSession, NonBonusTrialsHaveNoUsage) {
  TrialSession s(forward_map(), direct_spec(0.0), TrialConfig{}, 1);
  s.tick();
  EXPECT_FALSE(s.result().usage_percent(ControlMethod::Direct));
}

TEST(TrialSession, ConstructorValidation) {
  EXPECT_THROW(TrialSession(forward_map(), {ControlMethod::Switchable, 1.0, MapVariant::Bonus, false},
                            TrialConfig{}, 1),
               std::invalid_argument);
  EXPECT_THROW(TrialSession(forward_map(), direct_spec(-1.0), TrialConfig{}, 1), std::invalid_argument);
  TrialConfig bad;
  bad.inflation_radius = -1.0;
  EXPECT_THROW(TrialSession(forward_map(), direct_spec(0.0), bad, 1), std::invalid_argument);
}

TEST(TrialConfig, JsonRoundTrip) {
  TrialConfig c;
  c.delayed_links = ChannelConfig{0.5, 0.25};
  c.max_duration = 90.0;
  const TrialConfig back = trial_config_from_json(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
  const ExperimentPlan p = build_plan("p", ControlOrder::WCFirst, 9, true);
  EXPECT_EQ(plan_from_json(to_json(p)), p);
}

TEST(ExperimentSession, LifecycleAndQuestionnaires) {
  ExperimentSession e(build_plan("p01", ControlOrder::DCFirst, 4), forward_map(), TrialConfig{});
  EXPECT_THROW(e.submit_questionnaire(0, Instrument::SUS, std::vector<int>(10, 3)), TrialIncomplete);
  TrialSession& t = e.start_next_trial();
  EXPECT_THROW(e.start_next_trial(), TrialIncomplete);
  EXPECT_THROW(e.conclude_trial(), TrialIncomplete);
  t.abort();
  e.conclude_trial();
  EXPECT_EQ(e.submit_questionnaire(0, Instrument::SUS, std::vector<int>(10, 3)), 50.0);
  EXPECT_THROW(e.submit_questionnaire(0, Instrument::SUS, std::vector<int>(10, 3)), DuplicateSubmission);
  EXPECT_EQ(e.submit_questionnaire(0, Instrument::TLX, {10, 20, 30, 40, 50, 60}), 35.0);
  EXPECT_THROW(e.submit_questionnaire(7, Instrument::TLX, {10, 20, 30, 40, 50, 60}), std::out_of_range);
  const std::string q = questionnaire_csv_header() + questionnaire_csv_rows(e.plan(), e.questionnaires());
  EXPECT_NE(q.find("p01,0,direct,0,SUS,50,3,3,3,3,3,3,3,3,3,3"), std::string::npos) << q;
}

TEST(ExperimentSession, BotRunProducesCsvAndReplays) {
  EventLog log;
  ExperimentSession e(build_plan("p07", ControlOrder::WCFirst, 11, true), forward_map(), TrialConfig{}, &log);
  run_bot_session(e, BotSuite{});
  ASSERT_TRUE(e.plan_complete());
  for (const auto& r : e.results()) EXPECT_TRUE(r.completed);
  const std::string csv = results_csv(e.plan(), e.results());
  EXPECT_EQ(csv.rfind(results_csv_header(), 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 6);
  EXPECT_NE(csv.find("p07,WCFirst,waypoint,0,"), std::string::npos) << csv;
  // 4 trials x (SUS + TLX).
  EXPECT_EQ(e.questionnaires().size(), 8u);

  const auto replayed = replay(EventLog::parse(log.to_string()));
  ASSERT_EQ(replayed.size(), 5u);
  std::vector<TrialResult> results;
  for (const auto& t : replayed) results.push_back(t.result);
  EXPECT_EQ(results_csv(e.plan(), results), csv);
}

TEST(Replay, TamperedLogMismatches) {
  EventLog log;
  TrialSession s(forward_map(), direct_spec(0.0), TrialConfig{}, 1, &log);
  s.receive(cmd::Drive{{1.0, 0.0}});
  for (int i = 0; i < 120; ++i) s.tick();
  s.abort();
  EXPECT_NO_THROW(replay(log));
  std::string text = log.to_string();
  const auto pos = text.find("\"y\":1.0");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, 7, "\"y\":0.5");
  EXPECT_THROW(replay(EventLog::parse(text)), ReplayMismatch);
}
