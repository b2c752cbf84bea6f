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

#include <cstdint>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

#include "telewaypoint/session.hpp"

namespace telewaypoint {

enum class BotKind { Direct, Waypoint, Switching };
std::string_view to_string(BotKind k);

struct BotConfig {
  BotKind kind = BotKind::Direct;
  // Time between decisions, plus a seeded extra draw from [0, reaction_jitter).
  double reaction_delay = 0.2;
  double reaction_jitter = 0.1;
  // Waypoint bot: distance along the reference path to the next target.
  double waypoint_spacing = 5.0;
  // Waypoint bot: aim the next target once the robot is this close to the
  // current one, plus the distance it covers in the observed command round
  // trip. 0 waits for arrival before aiming again.
  double retarget_distance = 1.0;
  // Clearance of the reference path the bots follow.
  double path_clearance = 0.7;
  // Direct bot: only steers at points it can reach keeping this much room
  // around its center, so the proximity warning stays quiet.
  double steer_clearance = 0.45;
  // Direct bot: turn rate per radian of heading error, and the heading error
  // below which it drives forward at full speed.
  double steer_gain = 1.2;
  double align_tolerance = 0.3;
  // Arrow task: response time drawn from [rt_min, rt_max); wrong button with
  // probability error_rate.
  double rt_min = 0.45;
  double rt_max = 1.1;
  double error_rate = 0.05;

  void validate() const;
};

// Reference route from start to goal on a costmap inflated by `clearance`:
// the optimal cell route's centers, ending at the goal.
std::vector<Point2D> reference_path(const OccupancyGrid& map, double clearance);

// Pitch (radians, negative is down) that lands the arc `range` meters away on
// level ground, searching the rising branch below the range-maximizing pitch.
// Returns nullopt beyond the arc's reach.
std::optional<double> pitch_for_range(double range, const ArcConfig& cfg);

// Scripted operator. It only sees delivered frames and only acts through wire
// commands, so every link delay applies to it as it would to a person.
class Bot {
 public:
  Bot(BotConfig cfg, const OccupancyGrid& map, const TrialConfig& trial, std::uint64_t seed);

  // Latest frame delivered to the operator.
  void observe(const StateFrame& frame);
  // Commands the operator issues at sim time `now`.
  std::vector<WireCommand> act(SimTime now);
  // A command was refused at the wire (e.g. a stale stimulus id).
  void refused(const WireCommand& command);

  BotKind kind() const { return cfg_.kind; }
  ControlMethod believed_method() const { return method_; }
  int confirmations() const { return confirmations_; }
  const std::vector<Point2D>& route() const { return route_; }

 private:
  void answer_stimuli(SimTime now, std::vector<WireCommand>& out);
  void drive(SimTime now, std::vector<WireCommand>& out);
  void navigate(SimTime now, std::vector<WireCommand>& out);
  std::size_t advance_progress(Point2D p);
  bool clear_segment(Point2D a, Point2D b, double clearance) const;
  double draw();

  BotConfig cfg_;
  const OccupancyGrid& map_;
  TrialConfig trial_;
  Costmap costmap_;
  std::vector<Point2D> route_;
  std::vector<double> route_s_;
  std::mt19937_64 rng_;

  std::optional<StateFrame> frame_;
  SimTime next_decision_{0};
  std::size_t progress_ = 0;
  ControlMethod method_;

  // Waypoint exchange bookkeeping.
  std::optional<Point2D> sent_target_;
  std::optional<Point2D> active_target_;
  SimTime sent_at_{0};
  SimTime latency_{0};
  double spacing_;
  int confirmations_ = 0;

  // Stimuli seen and their scheduled answers.
  struct PendingAnswer {
    int id;
    Arrow button;
    SimTime at;
  };
  std::vector<int> seen_stimuli_;
  std::vector<PendingAnswer> answers_;

  // Direct bot recovery when the proximity gate holds it.
  SimTime blocked_since_{-1};
  SimTime reverse_until_{0};
  // Direct bot lag estimate: when the last new turn direction was sent.
  int turn_sign_ = 0;
  bool turn_pending_ = false;
  SimTime turn_sent_at_{0};
};

// Drives one trial to completion with `bot` as the operator; commands go
// through the line-encoded wire path. Aborts at `time_limit` seconds.
TrialResult run_bot_trial(TrialSession& session, Bot& bot, double time_limit = 600.0);

struct BotSuite {
  BotConfig direct{BotKind::Direct};
  BotConfig waypoint{BotKind::Waypoint};
  BotConfig switching{BotKind::Switching};
  // Answer every questionnaire with seeded plausible items.
  bool answer_questionnaires = true;

  const BotConfig& for_trial(const TrialSpec& spec) const;
};

// Runs every remaining trial of the experiment with bots.
void run_bot_session(ExperimentSession& session, const BotSuite& bots, double time_limit = 600.0);

// Paired delay experiment: for each seed, the same bot drives the same map
// and stimulus schedule once undelayed and once with `delay` on the links.
struct PairedRun {
  std::uint64_t seed = 0;
  TrialResult undelayed;
  TrialResult delayed;
  double ratio() const { return delayed.completion_time / undelayed.completion_time; }
};

struct DelayExperiment {
  BotKind kind = BotKind::Direct;
  std::vector<PairedRun> runs;
  // Mean delayed completion time over mean undelayed completion time.
  double mean_ratio() const;
  bool all_completed() const;
};

DelayExperiment run_delay_experiment(const OccupancyGrid& map, const BotConfig& bot,
                                     const TrialConfig& trial, std::size_t runs,
                                     std::uint64_t seed, double delay = kDelayedCondition,
                                     double time_limit = 600.0);

}  // namespace telewaypoint
