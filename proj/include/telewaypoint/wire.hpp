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
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "telewaypoint/protocol.hpp"
#include "telewaypoint/selection.hpp"
#include "telewaypoint/sim.hpp"

namespace telewaypoint {

// One wire kind per operator control.
namespace cmd {
struct Drive {
  DriveInput input;
};
struct AimBegin {};
struct AimUpdate {
  ControllerPose pose;
};
struct AimRelease {};
struct Confirm {};
struct StopGrip {};
struct SwitchMethod {
  ControlMethod to = ControlMethod::Direct;
};
struct StimulusResponse {
  Arrow button = Arrow::Left;
  // Answers the newest active stimulus when absent.
  std::optional<int> stimulus_id;
};
}  // namespace cmd

using WireCommand = std::variant<cmd::Drive, cmd::AimBegin, cmd::AimUpdate, cmd::AimRelease,
                                 cmd::Confirm, cmd::StopGrip, cmd::SwitchMethod,
                                 cmd::StimulusResponse>;

std::string_view command_kind(const WireCommand& c);

class WireFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

nlohmann::json to_json(const WireCommand& c);
// Throws WireFormatError when the kind is unknown or the payload does not
// match it.
WireCommand command_from_json(const nlohmann::json& j);

std::string encode_command(const WireCommand& c);
WireCommand decode_command(std::string_view line);

enum class TrialPhase { Running, Complete, Aborted };
std::string_view to_string(TrialPhase p);

struct StimulusView {
  int id = 0;
  Arrow direction = Arrow::Left;
  double spawn_time = 0.0;
};

struct ResponseAck {
  int stimulus_id = 0;
  bool correct = false;
  double response_time = 0.0;
};

// Snapshot pushed to the operator once per tick through the downlink.
struct StateFrame {
  std::int64_t tick = 0;
  double time = 0.0;
  RobotState robot;
  bool proximity_warning = false;
  ControlMethod active_method = ControlMethod::Direct;
  SelectionMode selection_mode = SelectionMode::Idle;
  std::optional<Point2D> reticle;
  std::optional<Point2D> prospective_target;
  std::optional<Point2D> confirmed_target;
  bool navigating = false;
  std::vector<Point2D> path;
  std::vector<StimulusView> active_stimuli;
  std::vector<ResponseAck> acks;
  TrialPhase phase = TrialPhase::Running;
  bool delay_onset = false;
  bool delay_active = false;
  std::vector<std::string> notices;
  std::vector<std::string> questionnaires_due;
};

nlohmann::json to_json(const StateFrame& f);
std::string encode_frame(const StateFrame& f);

}  // namespace telewaypoint
