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

#include <optional>
#include <stdexcept>
#include <string_view>

#include "telewaypoint/geometry.hpp"
#include "telewaypoint/planner.hpp"

namespace telewaypoint {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Vec3&, const Vec3&) = default;
};

// Tracked controller reduced to its aim axis, in world coordinates.
struct ControllerPose {
  Vec3 position;
  Vec3 forward;

  // Throws std::invalid_argument unless |forward| = 1 (1e-9) and z >= 0.
  void validate() const;
  // Aim from `position` with the given yaw and pitch (pitch < 0 is down).
  static ControllerPose aimed(Vec3 position, double yaw, double pitch);
};

// Fixed-launch-speed ballistic arc, the usual VR teleport pointer.
struct ArcConfig {
  double launch_speed = 8.0;
  double gravity = 9.81;
  double sample_step = 0.005;
  double max_flight = 3.0;
  // Operator hand height above the ground at the robot position.
  double hand_height = 1.2;

  void validate() const;
};

// Where the arc from `pose` first meets the ground plane, or nullopt when it
// does not land within max_flight or lands on a non-free costmap cell.
std::optional<Point2D> arc_project(const ControllerPose& pose, const Costmap& costmap,
                                   const ArcConfig& cfg);

// Ground-plane landing point ignoring obstacles (nullopt if no landing).
std::optional<Point2D> arc_landing(const ControllerPose& pose, const ArcConfig& cfg);

enum class SelectionMode { Idle, Aiming, Prospective, Navigating };

std::string_view to_string(SelectionMode mode);

struct ConfirmResult;

class IllegalTransition : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Target-selection state. Constructed only through the transition functions
// below, which keep the mode/target invariants:
//   reticle set only while Aiming (and may be empty when the arc is invalid),
//   prospective_target set iff Prospective, confirmed_target set iff Navigating.
class SelectionState {
 public:
  SelectionState() = default;

  SelectionMode mode() const { return mode_; }
  const std::optional<Point2D>& reticle() const { return reticle_; }
  const std::optional<Point2D>& prospective_target() const { return prospective_; }
  const std::optional<Point2D>& confirmed_target() const { return confirmed_; }
  // Target the robot keeps driving to while the operator aims a new one.
  const std::optional<Point2D>& background_target() const { return background_; }

  friend bool operator==(const SelectionState&, const SelectionState&) = default;

 private:
  friend SelectionState begin_aim(const SelectionState&);
  friend SelectionState update_aim(const SelectionState&, const ControllerPose&,
                                   const Costmap&, const ArcConfig&);
  friend SelectionState release_aim(const SelectionState&);
  friend ConfirmResult confirm(const SelectionState&);
  friend SelectionState stop(const SelectionState&);
  friend SelectionState arrive(const SelectionState&);

  SelectionMode mode_ = SelectionMode::Idle;
  std::optional<Point2D> reticle_;
  std::optional<Point2D> prospective_;
  std::optional<Point2D> confirmed_;
  std::optional<Point2D> background_;
};

struct NavigationRequest {
  Point2D target;
};

struct ConfirmResult {
  SelectionState state;
  NavigationRequest request;
};

// Aim button pressed. Allowed from Idle, Prospective (the disk is discarded)
// and Navigating (navigation continues). Throws IllegalTransition from Aiming.
SelectionState begin_aim(const SelectionState& state);

// Recomputes the reticle from the controller pose. Aiming only.
SelectionState update_aim(const SelectionState& state, const ControllerPose& pose,
                          const Costmap& costmap, const ArcConfig& cfg);

// Aim button released: a valid reticle becomes the prospective target, an
// invalid one returns to Idle (or to Navigating if a navigation is running).
SelectionState release_aim(const SelectionState& state);

// Trigger pulled on a prospective target: Navigating + a request for the
// planner. A new confirm replaces any running navigation target.
ConfirmResult confirm(const SelectionState& state);

// Grip button: always Idle with every target cleared.
SelectionState stop(const SelectionState& state);

// The robot reached its navigation target.
SelectionState arrive(const SelectionState& state);

}  // namespace telewaypoint
