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

#include "telewaypoint/protocol.hpp"

#include <array>
#include <cmath>
#include <numeric>

namespace telewaypoint {

std::string_view to_string(ControlOrder v) {
  return v == ControlOrder::DCFirst ? "DCFirst" : "WCFirst";
}

std::string_view to_string(ControlMethod v) {
  switch (v) {
    case ControlMethod::Direct:
      return "direct";
    case ControlMethod::Waypoint:
      return "waypoint";
    case ControlMethod::Switchable:
      return "switchable";
  }
  return "unknown";
}

std::string_view to_string(MapVariant v) {
  switch (v) {
    case MapVariant::Forward:
      return "F";
    case MapVariant::Reverse:
      return "R";
    case MapVariant::ForwardMirrored:
      return "FM";
    case MapVariant::ReverseMirrored:
      return "RM";
    case MapVariant::Bonus:
      return "Bonus";
  }
  return "unknown";
}

std::string_view to_string(Arrow v) { return v == Arrow::Left ? "left" : "right"; }

ControlOrder parse_order(std::string_view s) {
  if (s == "DCFirst") return ControlOrder::DCFirst;
  if (s == "WCFirst") return ControlOrder::WCFirst;
  throw std::invalid_argument("unknown order: " + std::string(s));
}

ControlMethod parse_method(std::string_view s) {
  if (s == "direct") return ControlMethod::Direct;
  if (s == "waypoint") return ControlMethod::Waypoint;
  if (s == "switchable") return ControlMethod::Switchable;
  throw std::invalid_argument("unknown control method: " + std::string(s));
}

MapVariant parse_variant(std::string_view s) {
  for (auto v : {MapVariant::Forward, MapVariant::Reverse, MapVariant::ForwardMirrored,
                 MapVariant::ReverseMirrored, MapVariant::Bonus}) {
    if (to_string(v) == s) return v;
  }
  throw std::invalid_argument("unknown map variant: " + std::string(s));
}

Arrow parse_arrow(std::string_view s) {
  if (s == "left") return Arrow::Left;
  if (s == "right") return Arrow::Right;
  throw std::invalid_argument("unknown button: " + std::string(s));
}

ExperimentPlan build_plan(std::string participant_id, ControlOrder order,
                          std::uint64_t seed, bool with_bonus) {
  const ControlMethod first =
      order == ControlOrder::DCFirst ? ControlMethod::Direct : ControlMethod::Waypoint;
  const ControlMethod second =
      order == ControlOrder::DCFirst ? ControlMethod::Waypoint : ControlMethod::Direct;
  ExperimentPlan plan;
  plan.participant_id = std::move(participant_id);
  plan.order = order;
  plan.rng_seed = seed;
  plan.trials = {
      {first, 0.0, MapVariant::Forward, false},
      {first, kDelayedCondition, MapVariant::Reverse, false},
      {second, 0.0, MapVariant::ForwardMirrored, false},
      {second, kDelayedCondition, MapVariant::ReverseMirrored, false},
  };
  if (with_bonus) {
    plan.trials.push_back(
        {ControlMethod::Switchable, kDelayedCondition, MapVariant::Bonus, true});
  }
  return plan;
}

void validate_plan(const ExperimentPlan& plan) {
  const auto fail = [](const char* what) { throw std::invalid_argument(what); };
  if (plan.trials.size() != 4 && plan.trials.size() != 5) fail("plan needs 4 trials plus optional bonus");
  const ControlMethod first =
      plan.order == ControlOrder::DCFirst ? ControlMethod::Direct : ControlMethod::Waypoint;
  const ControlMethod second =
      plan.order == ControlOrder::DCFirst ? ControlMethod::Waypoint : ControlMethod::Direct;
  constexpr std::array<MapVariant, 4> kVariants{MapVariant::Forward, MapVariant::Reverse,
                                                MapVariant::ForwardMirrored,
                                                MapVariant::ReverseMirrored};
  for (std::size_t i = 0; i < 4; ++i) {
    const TrialSpec& t = plan.trials[i];
    if (t.bonus || t.control == ControlMethod::Switchable) fail("bonus trial inside the main block");
    if (t.control != (i < 2 ? first : second)) fail("control order not counterbalanced");
    if (t.delay != (i % 2 == 0 ? 0.0 : kDelayedCondition)) fail("undelayed trial must come first");
    if (t.map_variant != kVariants[i]) fail("map variants out of order");
  }
  if (plan.trials.size() == 5) {
    const TrialSpec& b = plan.trials[4];
    if (!b.bonus || b.control != ControlMethod::Switchable) fail("fifth trial must be the bonus");
  }
  for (const TrialSpec& t : plan.trials) {
    if (t.bonus != (t.control == ControlMethod::Switchable)) fail("bonus iff switchable");
  }
}

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t trial_seed(std::uint64_t plan_seed, std::size_t trial_index) {
  std::uint64_t x = plan_seed ^ (0x5851f42d4c957f2dULL * (trial_index + 1));
  return splitmix64(x);
}

StimulusScheduler::StimulusScheduler(std::uint64_t seed) : state_(seed) { draw(0.0); }

double StimulusScheduler::uniform() {
  return static_cast<double>(splitmix64(state_) >> 11) * 0x1.0p-53;
}

void StimulusScheduler::draw(double base) {
  next_time_ = base + kMinGap + (kMaxGap - kMinGap) * uniform();
  next_dir_ = (splitmix64(state_) & 1U) ? Arrow::Right : Arrow::Left;
}

StimulusEvent StimulusScheduler::pop() {
  StimulusEvent e;
  e.id = next_id_++;
  e.direction = next_dir_;
  e.spawn_time = next_time_;
  draw(next_time_);
  return e;
}

std::vector<StimulusEvent> schedule_stimuli(double duration, std::uint64_t seed) {
  if (!(duration > 0.0)) throw std::invalid_argument("duration must be positive");
  StimulusScheduler sched(seed);
  std::vector<StimulusEvent> out;
  while (sched.peek_time() <= duration) out.push_back(sched.pop());
  return out;
}

StimulusEvent record_response(const StimulusEvent& event, Arrow button, double now) {
  if (event.response_time) throw AlreadyAnswered("stimulus already answered");
  if (now < event.spawn_time) throw std::invalid_argument("response precedes stimulus");
  StimulusEvent out = event;
  out.response_time = now;
  out.correct = button == event.direction;
  return out;
}

std::optional<double> TrialResult::mean_response_time() const {
  double sum = 0.0;
  int n = 0;
  for (const auto& r : responses) {
    if (!r.response_time) continue;
    sum += *r.response_time - r.spawn_time;
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / n;
}

std::optional<double> TrialResult::usage_percent(ControlMethod m) const {
  if (usage_seconds.empty()) return std::nullopt;
  double total = 0.0;
  for (const auto& [method, secs] : usage_seconds) total += secs;
  if (!(total > 0.0)) return std::nullopt;
  const auto it = usage_seconds.find(m);
  return 100.0 * (it == usage_seconds.end() ? 0.0 : it->second) / total;
}

}  // namespace telewaypoint
