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
#include <stdexcept>
#include <vector>

#include "telewaypoint/geometry.hpp"
#include "telewaypoint/grid.hpp"
#include "telewaypoint/sim.hpp"

namespace telewaypoint {

enum class CostCell : std::uint8_t { Free, Inflated, Occupied };

class Costmap {
 public:
  Costmap(int width, int height, double resolution, std::vector<CostCell> cells);

  int width() const { return width_; }
  int height() const { return height_; }
  double resolution() const { return resolution_; }
  const std::vector<CostCell>& cells() const { return cells_; }

  bool in_bounds(CellIndex c) const {
    return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_;
  }
  // Out-of-bounds cells read as Occupied.
  CostCell at(CellIndex c) const {
    return in_bounds(c) ? cells_[static_cast<std::size_t>(c.y) * width_ + c.x]
                        : CostCell::Occupied;
  }
  bool traversable(CellIndex c) const { return at(c) == CostCell::Free; }

  CellIndex cell_of(Point2D p) const;
  Point2D center_of(CellIndex c) const;

 private:
  int width_;
  int height_;
  double resolution_;
  std::vector<CostCell> cells_;
};

// Marks every free cell whose center lies within `radius` (center to center)
// of an occupied cell center as Inflated.
Costmap inflate(const OccupancyGrid& grid, double radius);

class PlanningError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class GoalUnreachable : public PlanningError {
 public:
  using PlanningError::PlanningError;
};
class GoalBlocked : public PlanningError {
 public:
  using PlanningError::PlanningError;
};
class StartBlocked : public PlanningError {
 public:
  using PlanningError::PlanningError;
};

// Raw 8-connected cell route. Cost in cell units is counted exactly as
// straight_moves + diagonal_moves * sqrt(2).
struct GridRoute {
  std::vector<CellIndex> cells;
  int straight_moves = 0;
  int diagonal_moves = 0;

  double cost() const;
};

struct Path {
  std::vector<Point2D> waypoints;
  double total_length = 0.0;
  // The optimal cell route the waypoints were smoothed from.
  GridRoute route;
};

// A* over traversable cells: straight moves cost 1, diagonals sqrt(2) and may
// not cut a blocked corner. Ties are broken by lower y, then lower x. The
// start cell may be Inflated (so a robot can leave an obstacle margin) but not
// Occupied.
GridRoute search(const Costmap& costmap, CellIndex start, CellIndex goal);

// True when every cell whose closed square touches segment [a, b] is Free.
bool line_of_sight(const Costmap& costmap, Point2D a, Point2D b);

// search() followed by greedy line-of-sight shortcutting. The first waypoint is
// `start`, the last is `goal`.
Path plan(const Costmap& costmap, Point2D start, Point2D goal);

double polyline_length(const std::vector<Point2D>& points);

struct PursuitConfig {
  double lookahead = 0.5;
  double gain = 2.0;
  double arrive_tolerance = 0.15;
};

struct FollowOutput {
  VelocityCommand command;
  bool arrived = false;
};

// Pure pursuit toward the point `lookahead` ahead of the robot's projection
// onto the path.
FollowOutput follow(const Path& path, const RobotState& state, const SimConfig& sim,
                    const PursuitConfig& cfg);

}  // namespace telewaypoint
