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

#include "telewaypoint/sim.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace telewaypoint {

void SimConfig::validate() const {
  if (!(dt > 0.0) || !(v_max > 0.0) || !(omega_max > 0.0) ||
      !(robot_radius > 0.0) || !(proximity_range > 0.0) ||
      !(proximity_fov > 0.0) || proximity_fov > 2.0 * std::numbers::pi) {
    throw std::invalid_argument("SimConfig: physical parameters must be positive");
  }
}

DriveInput DriveInput::clamped(double y_axis, double x_axis) {
  return {std::clamp(y_axis, -1.0, 1.0), std::clamp(x_axis, -1.0, 1.0)};
}

RobotState initial_state(const OccupancyGrid& grid, const SimConfig& cfg) {
  RobotState s;
  s.pose = grid.start_pose();
  s.proximity_blocked = proximity_check(grid, s, cfg);
  return s;
}

namespace {

struct Square {
  double x0, y0, x1, y1;
};

Square cell_square(const OccupancyGrid& grid, int x, int y) {
  const double r = grid.resolution();
  return {x * r, y * r, (x + 1) * r, (y + 1) * r};
}

double point_square_distance(Point2D p, const Square& s) {
  const double dx = std::max({s.x0 - p.x, 0.0, p.x - s.x1});
  const double dy = std::max({s.y0 - p.y, 0.0, p.y - s.y1});
  return std::hypot(dx, dy);
}

// Calls fn(x, y) for every occupied cell whose square may lie within `reach`
// of p. Out-of-bounds cells count as occupied.
template <class Fn>
void for_occupied_near(const OccupancyGrid& grid, Point2D p, double reach, Fn&& fn) {
  const double r = grid.resolution();
  const int x0 = static_cast<int>(std::floor((p.x - reach) / r));
  const int x1 = static_cast<int>(std::floor((p.x + reach) / r));
  const int y0 = static_cast<int>(std::floor((p.y - reach) / r));
  const int y1 = static_cast<int>(std::floor((p.y + reach) / r));
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      if (grid.occupied(x, y) && fn(x, y)) return;
    }
  }
}

using Polygon = std::vector<Point2D>;

double cross(Point2D a, Point2D b) { return a.x * b.y - a.y * b.x; }

// Keeps the part of `poly` where cross(dir, p - apex) * side >= 0.
Polygon clip_half_plane(const Polygon& poly, Point2D apex, Point2D dir, double side) {
  Polygon out;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point2D a = poly[i];
    const Point2D b = poly[(i + 1) % n];
    const double da = side * cross(dir, a - apex);
    const double db = side * cross(dir, b - apex);
    if (da >= 0.0) out.push_back(a);
    if ((da >= 0.0) != (db >= 0.0)) {
      const double t = da / (da - db);
      out.push_back(a + t * (b - a));
    }
  }
  return out;
}

double point_polygon_distance(Point2D p, const Polygon& poly) {
  bool inside = true;
  double best = INFINITY;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point2D a = poly[i];
    const Point2D b = poly[(i + 1) % n];
    if (cross(b - a, p - a) < 0.0) inside = false;
    best = std::min(best, point_segment_distance(p, a, b));
  }
  return inside ? 0.0 : best;
}

// Square vs. the wedge between headings lo and hi (hi - lo <= pi), limited to
// radius `reach` around the apex.
bool square_hits_wedge(const Square& s, Point2D apex, double lo, double hi,
                       double reach) {
  Polygon poly{{s.x0, s.y0}, {s.x1, s.y0}, {s.x1, s.y1}, {s.x0, s.y1}};
  poly = clip_half_plane(poly, apex, {std::cos(lo), std::sin(lo)}, 1.0);
  if (poly.empty()) return false;
  poly = clip_half_plane(poly, apex, {std::cos(hi), std::sin(hi)}, -1.0);
  if (poly.empty()) return false;
  return point_polygon_distance(apex, poly) <= reach;
}

}  // namespace

bool disc_overlaps_obstacle(const OccupancyGrid& grid, Point2D center, double radius) {
  bool hit = false;
  for_occupied_near(grid, center, radius, [&](int x, int y) {
    hit = point_square_distance(center, cell_square(grid, x, y)) < radius;
    return hit;
  });
  return hit;
}

double obstacle_clearance(const OccupancyGrid& grid, Point2D p, double max_distance) {
  double best = max_distance;
  for_occupied_near(grid, p, max_distance, [&](int x, int y) {
    best = std::min(best, point_square_distance(p, cell_square(grid, x, y)));
    return false;
  });
  return best;
}

RobotState step(const RobotState& state, VelocityCommand cmd,
                const OccupancyGrid& grid, const SimConfig& cfg) {
  const double v = std::clamp(cmd.linear, -cfg.v_max, cfg.v_max);
  const double w = std::clamp(cmd.angular, -cfg.omega_max, cfg.omega_max);

  RobotState next = state;
  next.tick = state.tick + 1;
  next.linear_vel = v;
  next.angular_vel = w;
  next.collision_clamped = false;

  const double th = state.pose.theta;
  const Point2D moved{state.pose.x + v * std::cos(th) * cfg.dt,
                      state.pose.y + v * std::sin(th) * cfg.dt};
  if (v != 0.0 && disc_overlaps_obstacle(grid, moved, cfg.robot_radius)) {
    next.linear_vel = 0.0;
    next.collision_clamped = true;
  } else {
    next.pose.x = moved.x;
    next.pose.y = moved.y;
  }
  next.pose.theta = normalize_angle(th + w * cfg.dt);
  next.proximity_blocked = proximity_check(grid, next, cfg);
  return next;
}

bool proximity_check(const OccupancyGrid& grid, const RobotState& state,
                     const SimConfig& cfg) {
  const Point2D apex = state.pose.position();
  const double reach = cfg.robot_radius + cfg.proximity_range;
  const double half = 0.5 * cfg.proximity_fov;
  const double th = state.pose.theta;
  bool hit = false;
  for_occupied_near(grid, apex, reach, [&](int x, int y) {
    const Square sq = cell_square(grid, x, y);
    if (point_square_distance(apex, sq) > reach) return false;
    hit = square_hits_wedge(sq, apex, th - half, th, reach) ||
          square_hits_wedge(sq, apex, th, th + half, reach);
    return hit;
  });
  return hit;
}

VelocityCommand apply_direct_control(DriveInput input, bool blocked,
                                     const SimConfig& cfg) {
  const DriveInput in = DriveInput::clamped(input.y_axis, input.x_axis);
  double v = in.y_axis * cfg.v_max;
  if (blocked) v = std::min(v, 0.0);
  return {v, -in.x_axis * cfg.omega_max};
}

}  // namespace telewaypoint
