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
#include <string>
#include <string_view>
#include <vector>

#include "telewaypoint/geometry.hpp"

namespace telewaypoint {

enum class Cell : std::uint8_t { Free, Occupied };

struct CellIndex {
  int x = 0;
  int y = 0;

  friend bool operator==(const CellIndex&, const CellIndex&) = default;
};

class MalformedMap : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kDefaultResolution = 0.25;
inline constexpr double kDefaultGoalRadius = 0.5;

// Rasterized world. Cell (0, 0) is the lower-left cell; its lower-left corner
// is the world origin. Anything outside the grid counts as occupied.
class OccupancyGrid {
 public:
  // Throws std::invalid_argument when an invariant does not hold.
  OccupancyGrid(int width_cells, int height_cells, double resolution,
                std::vector<Cell> cells, Pose2D start_pose, Point2D goal_center,
                double goal_radius, double midline_x);

  int width() const { return width_; }
  int height() const { return height_; }
  double resolution() const { return resolution_; }
  double width_m() const { return width_ * resolution_; }
  double height_m() const { return height_ * resolution_; }
  const std::vector<Cell>& cells() const { return cells_; }

  const Pose2D& start_pose() const { return start_; }
  Point2D goal_center() const { return goal_; }
  double goal_radius() const { return goal_radius_; }
  double midline_x() const { return midline_x_; }

  bool in_bounds(CellIndex c) const {
    return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_;
  }
  bool occupied(CellIndex c) const {
    return !in_bounds(c) || cells_[index(c)] == Cell::Occupied;
  }
  bool occupied(int x, int y) const { return occupied(CellIndex{x, y}); }

  CellIndex cell_of(Point2D p) const;
  Point2D center_of(CellIndex c) const;

  friend bool operator==(const OccupancyGrid&, const OccupancyGrid&) = default;

 private:
  std::size_t index(CellIndex c) const {
    return static_cast<std::size_t>(c.y) * width_ + c.x;
  }

  int width_;
  int height_;
  double resolution_;
  std::vector<Cell> cells_;
  Pose2D start_;
  Point2D goal_;
  double goal_radius_;
  double midline_x_;
};

// Heading from `from` toward `to`; 0 when the points coincide.
double heading_toward(Point2D from, Point2D to);

// Parses the ASCII map format:
//   optional header "res=<meters>", then one row per line, top row first;
//   '#' occupied, '.' free, 'S' start, 'T' goal, '|' midline marker.
// Throws MalformedMap.
OccupancyGrid load_map(std::string_view text);
OccupancyGrid load_map_file(const std::string& path);

// Inverse of load_map (up to '|' markers, which are written on every free
// cell of the midline column when the midline falls on a column center).
std::string format_map(const OccupancyGrid& grid);

// Reflects about the vertical axis: x -> width - x.
OccupancyGrid mirror_map(const OccupancyGrid& grid);

// Swaps start and goal; the new start faces the new goal.
OccupancyGrid reverse_map(const OccupancyGrid& grid);

}  // namespace telewaypoint
