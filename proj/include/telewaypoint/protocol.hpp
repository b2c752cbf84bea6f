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
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace telewaypoint {

enum class ControlOrder { DCFirst, WCFirst };
enum class ControlMethod { Direct, Waypoint, Switchable };
enum class MapVariant { Forward, Reverse, ForwardMirrored, ReverseMirrored, Bonus };
enum class Arrow { Left, Right };

std::string_view to_string(ControlOrder v);
std::string_view to_string(ControlMethod v);
std::string_view to_string(MapVariant v);
std::string_view to_string(Arrow v);

// Parsers accept the to_string spellings; they throw std::invalid_argument.
ControlOrder parse_order(std::string_view s);
ControlMethod parse_method(std::string_view s);
MapVariant parse_variant(std::string_view s);
Arrow parse_arrow(std::string_view s);

struct TrialSpec {
  ControlMethod control = ControlMethod::Direct;
  // Link delay in seconds. For the bonus trial this is the delay imposed at the
  // midline; the trial starts undelayed.
  double delay = 0.0;
  MapVariant map_variant = MapVariant::Forward;
  bool bonus = false;

  friend bool operator==(const TrialSpec&, const TrialSpec&) = default;
};

struct ExperimentPlan {
  std::string participant_id;
  ControlOrder order = ControlOrder::DCFirst;
  std::vector<TrialSpec> trials;
  std::uint64_t rng_seed = 0;

  friend bool operator==(const ExperimentPlan&, const ExperimentPlan&) = default;
};

inline constexpr double kDelayedCondition = 1.0;

// Counterbalanced four-trial plan: each method runs undelayed then delayed,
// map variants forward, reverse, forward-mirrored, reverse-mirrored. With
// `with_bonus` a fifth switchable trial is appended.
ExperimentPlan build_plan(std::string participant_id, ControlOrder order,
                          std::uint64_t seed, bool with_bonus = false);

// Throws std::invalid_argument if the plan breaks a counterbalancing rule.
void validate_plan(const ExperimentPlan& plan);

// Per-trial seed derived from the plan seed.
std::uint64_t trial_seed(std::uint64_t plan_seed, std::size_t trial_index);

class AlreadyAnswered : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};
class NotBonusTrial : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct StimulusEvent {
  int id = 0;
  Arrow direction = Arrow::Left;
  double spawn_time = 0.0;
  std::optional<double> response_time;
  std::optional<bool> correct;
};

// Seeded generator for the arrow task: the first stimulus at U[7, 9] s, then
// gaps drawn from U[7, 9] s, directions uniform.
class StimulusScheduler {
 public:
  explicit StimulusScheduler(std::uint64_t seed);

  // Scheduled time of the upcoming stimulus and its direction.
  double peek_time() const { return next_time_; }
  StimulusEvent pop();

  static constexpr double kMinGap = 7.0;
  static constexpr double kMaxGap = 9.0;

 private:
  std::uint64_t state_;
  int next_id_ = 0;
  double next_time_ = 0.0;
  Arrow next_dir_ = Arrow::Left;

  double uniform();
  void draw(double base);
};

// All stimuli scheduled at or before `duration` seconds.
std::vector<StimulusEvent> schedule_stimuli(double duration, std::uint64_t seed);

// Marks a stimulus answered at `now`. Throws AlreadyAnswered, or
// std::invalid_argument if now precedes the spawn.
StimulusEvent record_response(const StimulusEvent& event, Arrow button, double now);

struct TrialResult {
  bool completed = false;
  double completion_time = 0.0;
  double distance_travelled = 0.0;
  std::vector<StimulusEvent> responses;
  int errors_count = 0;
  // Seconds under each method; filled for bonus trials only.
  std::map<ControlMethod, double> usage_seconds;
  int collision_clamps = 0;

  std::optional<double> mean_response_time() const;
  // Percentage of bonus-trial time under `m` (nullopt outside bonus trials).
  std::optional<double> usage_percent(ControlMethod m) const;
};

}  // namespace telewaypoint
