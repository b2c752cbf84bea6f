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

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "telewaypoint/channel.hpp"
#include "telewaypoint/event_log.hpp"
#include "telewaypoint/grid.hpp"
#include "telewaypoint/planner.hpp"
#include "telewaypoint/protocol.hpp"
#include "telewaypoint/selection.hpp"
#include "telewaypoint/sim.hpp"
#include "telewaypoint/wire.hpp"

namespace telewaypoint {

struct TrialConfig {
  SimConfig sim;
  PursuitConfig pursuit;
  ArcConfig arc;
  // Costmap margin for planning and target validity. Cells are tested at their
  // centers, and the pursuit follower cuts corners; 0.45 still collided.
  double inflation_radius = 0.55;
  // Link delays for the delayed condition. Unset: the whole trial delay sits
  // on the uplink and the downlink is undelayed.
  std::optional<ChannelConfig> delayed_links;
  double jitter = 0.0;
  ControlMethod bonus_initial_method = ControlMethod::Direct;
  // Trial aborts after this many seconds; 0 runs until the goal is reached.
  double max_duration = 0.0;
  int checkpoint_interval = 50;

  void validate() const;
  // Links at the start of a trial.
  ChannelConfig initial_links(const TrialSpec& spec) const;
  // Links once the delay is in force (delayed trials, or after the bonus onset).
  ChannelConfig delayed_links_for(const TrialSpec& spec) const;
};

nlohmann::json to_json(const TrialConfig& c);
TrialConfig trial_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TrialSpec& s);
TrialSpec trial_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TrialResult& r);
nlohmann::json to_json(const ExperimentPlan& p);
// Rebuilds a plan and checks it with validate_plan.
ExperimentPlan plan_from_json(const nlohmann::json& j);

class TrialOver : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// FNV-1a over the robot state, chained tick by tick.
std::uint64_t hash_state(std::uint64_t seed, const RobotState& s);

// One timed trial: the loop that polls the uplink, applies operator commands,
// drives the robot, runs the arrow task and pushes frames down the downlink.
struct TrialIdentity {
  std::string participant_id;
  ControlOrder order = ControlOrder::DCFirst;
  std::size_t trial_index = 0;
};

class TrialSession {
 public:
  TrialSession(OccupancyGrid map, TrialSpec spec, TrialConfig cfg, std::uint64_t seed,
               EventLog* event_log = nullptr, TrialIdentity identity = {});

  // Wire entry point. The command is stamped with the current sim time and
  // enters the uplink; stimulus responses are timed on receipt. Throws
  // NotBonusTrial, AlreadyAnswered, or TrialOver.
  void receive(const WireCommand& command);
  void receive_line(std::string_view line);

  // Advances exactly one fixed step and returns the frame it produced. Once
  // the trial is over the clock still advances (so the downlink drains) but
  // the robot no longer moves.
  const StateFrame& tick();
  // As tick(), asserting `now` is the next point on the dt grid.
  const StateFrame& tick(SimTime now);
  // Ticks until the clock reaches `until` (on the dt grid).
  void advance_to(SimTime until);

  // Frames the downlink delivers at the current time.
  std::vector<StateFrame> poll_frames();

  // Ends the trial without reaching the goal.
  void abort();

  bool finished() const { return phase_ != TrialPhase::Running; }
  // Finished and every frame has left the downlink.
  bool drained() const { return finished() && downlink_.in_flight() == 0; }
  TrialPhase phase() const { return phase_; }
  TrialResult result() const;
  SimTime now() const { return now_; }
  SimTime dt() const { return dt_; }
  std::uint64_t state_hash() const { return hash_; }
  const RobotState& robot() const { return state_; }
  const SelectionState& selection() const { return selection_; }
  const std::optional<Path>& path() const { return path_; }
  ControlMethod active_method() const { return active_; }
  const OccupancyGrid& map() const { return map_; }
  const Costmap& costmap() const { return costmap_; }
  const TrialSpec& spec() const { return spec_; }
  const TrialConfig& config() const { return cfg_; }
  const StateFrame& last_frame() const { return last_frame_; }
  bool delay_onset_fired() const { return onset_fired_; }
  SimTime uplink_delay() const { return uplink_.delay(); }

 private:
  void apply(const WireCommand& command, std::vector<std::string>& notices);
  void switch_method(ControlMethod to, std::vector<std::string>& notices);
  void handle_response(const cmd::StimulusResponse& r);
  void log(std::string_view kind, nlohmann::json data);
  void finish(TrialPhase phase);
  StateFrame make_frame(std::vector<std::string> notices, bool onset);

  OccupancyGrid map_;
  Costmap costmap_;
  TrialSpec spec_;
  TrialConfig cfg_;
  std::uint64_t seed_;
  EventLog* log_;
  TrialIdentity identity_;

  SimTime dt_;
  SimTime now_{0};
  RobotState state_;
  SelectionState selection_;
  std::optional<Path> path_;
  DriveInput drive_;
  ControlMethod active_;
  DelayChannel<WireCommand> uplink_;
  DelayChannel<StateFrame> downlink_;

  StimulusScheduler scheduler_;
  std::vector<StimulusEvent> stimuli_;
  std::optional<std::size_t> active_stimulus_;
  std::vector<ResponseAck> pending_acks_;

  double distance_ = 0.0;
  int collisions_ = 0;
  std::map<ControlMethod, std::int64_t> usage_ticks_;
  TrialPhase phase_ = TrialPhase::Running;
  double completion_time_ = 0.0;
  bool onset_fired_ = false;
  bool start_left_of_midline_;
  std::uint64_t hash_;
  StateFrame last_frame_;
};

// Builds the grid a plan's map variant uses.
OccupancyGrid map_for_variant(const OccupancyGrid& base, MapVariant v);

class TrialIncomplete : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};
class DuplicateSubmission : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

enum class Instrument { SUS, TLX };
std::string_view to_string(Instrument i);
Instrument parse_instrument(std::string_view s);

struct QuestionnaireEntry {
  std::size_t trial_index = 0;
  Instrument instrument = Instrument::SUS;
  std::vector<int> items;
  double score = 0.0;
};

// A participant's whole run: the plan, one trial at a time, results and
// questionnaire scores.
class ExperimentSession {
 public:
  ExperimentSession(ExperimentPlan plan, OccupancyGrid base_map, TrialConfig cfg,
                    EventLog* log = nullptr);

  const ExperimentPlan& plan() const { return plan_; }
  const TrialConfig& config() const { return cfg_; }
  const OccupancyGrid& base_map() const { return base_map_; }

  // Starts the next trial in the plan. Throws TrialIncomplete while one runs,
  // std::out_of_range once the plan is exhausted.
  TrialSession& start_next_trial();
  TrialSession* current_trial() { return current_.get(); }
  // Stores the result of the running trial once it is over.
  const TrialResult& conclude_trial();

  std::size_t trials_started() const { return next_trial_; }
  const std::vector<TrialResult>& results() const { return results_; }
  bool plan_complete() const;

  // Scores and stores a questionnaire for a concluded trial.
  double submit_questionnaire(std::size_t trial_index, Instrument instrument,
                              const std::vector<int>& items);
  const std::vector<QuestionnaireEntry>& questionnaires() const { return questionnaires_; }

 private:
  ExperimentPlan plan_;
  OccupancyGrid base_map_;
  TrialConfig cfg_;
  EventLog* log_;
  std::size_t next_trial_ = 0;
  std::unique_ptr<TrialSession> current_;
  std::vector<TrialResult> results_;
  std::vector<QuestionnaireEntry> questionnaires_;
};

// Results CSV: one row per trial.
std::string results_csv_header();
std::string results_csv_rows(const ExperimentPlan& plan, const std::vector<TrialResult>& results);
std::string results_csv(const ExperimentPlan& plan, const std::vector<TrialResult>& results);

// Questionnaire CSV: participant, trial, instrument, score, item1..item10.
std::string questionnaire_csv_header();
std::string questionnaire_csv_rows(const ExperimentPlan& plan,
                                   const std::vector<QuestionnaireEntry>& entries);

class ReplayMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ReplayedTrial {
  TrialSpec spec;
  std::size_t trial_index = 0;
  std::string participant_id;
  ControlOrder order = ControlOrder::DCFirst;
  TrialResult result;
  std::uint64_t final_hash = 0;
  RobotState final_state;
};

// Re-runs every trial in the log from its trial-start record, feeding the
// logged commands at their logged times. The regenerated log must match the
// original record for record; throws ReplayMismatch otherwise.
std::vector<ReplayedTrial> replay(const EventLog& log);

}  // namespace telewaypoint
