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
#include <numbers>

#include "telewaypoint/geometry.hpp"
#include "telewaypoint/grid.hpp"

namespace telewaypoint {

// Physical constants of the simulated differential-drive base. Defaults are
// nominal TurtleBot 2 figures and a 50 Hz fixed step.
struct SimConfig {
  double dt = 0.02;
  double v_max = 0.65;
  double omega_max = std::numbers::pi;
  double robot_radius = 0.18;
  // Sensing distance beyond the robot perimeter, and full forward sector angle.
  double proximity_range = 0.35;
  double proximity_fov = 2.0 * std::numbers::pi / 3.0;

  // Throws std::invalid_argument unless every field is positive.
  void validate() const;
};

struct VelocityCommand {
  double linear = 0.0;
  double angular = 0.0;

  friend bool operator==(const VelocityCommand&, const VelocityCommand&) = default;
};

// Trackpad axes. y: forward/back, x: thumb right turns right.
struct DriveInput {
  double y_axis = 0.0;
  double x_axis = 0.0;

  static DriveInput clamped(double y_axis, double x_axis);

  friend bool operator==(const DriveInput&, const DriveInput&) = default;
};

struct RobotState {
  Pose2D pose;
  double linear_vel = 0.0;
  double angular_vel = 0.0;
  std::int64_t tick = 0;
  bool proximity_blocked = false;
  // Set when the last step's translation was rejected for overlapping an
  // occupied cell.
  bool collision_clamped = false;

  friend bool operator==(const RobotState&, const RobotState&) = default;
};

RobotState initial_state(const OccupancyGrid& grid, const SimConfig& cfg);

// True when a disc of `radius` at `center` overlaps the interior of any
// occupied (or out-of-bounds) cell. Touching is not overlap.
bool disc_overlaps_obstacle(const OccupancyGrid& grid, Point2D center, double radius);

// Exact distance from `p` to the nearest occupied cell square, searching no
// further than `max_distance` (returns max_distance when nothing is closer).
double obstacle_clearance(const OccupancyGrid& grid, Point2D p, double max_distance);

// Unicycle integration for one fixed step. A translation that would overlap an
// obstacle is rejected: the robot keeps its position and linear_vel becomes 0.
RobotState step(const RobotState& state, VelocityCommand cmd,
                const OccupancyGrid& grid, const SimConfig& cfg);

// Forward proximity sensor: any occupied cell inside the sector of half-angle
// proximity_fov / 2 reaching proximity_range past the perimeter.
bool proximity_check(const OccupancyGrid& grid, const RobotState& state,
                     const SimConfig& cfg);

// Trackpad to velocity mapping with forward motion gated when blocked.
VelocityCommand apply_direct_control(DriveInput input, bool blocked,
                                     const SimConfig& cfg);

}  // namespace telewaypoint
