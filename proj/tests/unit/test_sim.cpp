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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "telewaypoint/grid.hpp"
#include "telewaypoint/sim.hpp"

using namespace telewaypoint;

namespace {

// 40x40 open floor with a border.
OccupancyGrid open_room() {
  std::string text;
  for (int r = 0; r < 40; ++r) {
    for (int c = 0; c < 40; ++c) {
      char ch = (r == 0 || c == 0 || r == 39 || c == 39) ? '#' : '.';
      if (r == 20 && c == 5) ch = 'S';
      if (r == 20 && c == 34) ch = 'T';
      text += ch;
    }
    text += '\n';
  }
  return load_map(text);
}

RobotState at(double x, double y, double theta) {
  RobotState s;
  s.pose = {x, y, theta};
  return s;
}

// Distance from p to the nearest occupied cell square.
double clearance(const OccupancyGrid& g, Point2D p) {
  double best = 1e9;
  for (int y = 0; y < g.height(); ++y) {
    for (int x = 0; x < g.width(); ++x) {
      if (!g.occupied(x, y)) continue;
      const double r = g.resolution();
      const double dx = std::max({x * r - p.x, 0.0, p.x - (x + 1) * r});
      const double dy = std::max({y * r - p.y, 0.0, p.y - (y + 1) * r});
      best = std::min(best, std::hypot(dx, dy));
    }
  }
  return best;
}

}  // namespace

TEST(Step, RestKeepsPose) {
  const OccupancyGrid g = open_room();
  const SimConfig cfg;
  const RobotState s = at(5.0, 5.0, 0.3);
  const RobotState n = step(s, {0.0, 0.0}, g, cfg);
  EXPECT_EQ(n.pose, s.pose);
  EXPECT_EQ(n.tick, s.tick + 1);
}

TEST(Step, AnalyticAdvance) {
  const OccupancyGrid g = open_room();
  SimConfig cfg;
  cfg.v_max = 1.0;
  const RobotState n = step(at(5.0, 5.0, 0.0), {1.0, 0.0}, g, cfg);
  EXPECT_NEAR(n.pose.x, 5.02, 1e-12);
  EXPECT_NEAR(n.pose.y, 5.0, 1e-12);
}

TEST(Step, DrivingIntoWallStopsShort) {
  const OccupancyGrid g = open_room();
  const SimConfig cfg;
  // One cell clear of the right-hand border.
  RobotState s = at(g.width_m() - 0.25 - 0.25 - cfg.robot_radius - 0.01, 5.0, 0.0);
  bool clamped = false;
  for (int i = 0; i < 100; ++i) {
    s = step(s, {cfg.v_max, 0.0}, g, cfg);
    clamped |= s.collision_clamped;
    ASSERT_GE(clearance(g, s.pose.position()), cfg.robot_radius);
  }
  EXPECT_TRUE(clamped);
  EXPECT_EQ(s.linear_vel, 0.0);
}

TEST(Step, ClampsVelocityCommands) {
  const OccupancyGrid g = open_room();
  const SimConfig cfg;
  const RobotState n = step(at(5.0, 5.0, 0.0), {10.0, -10.0}, g, cfg);
  EXPECT_LE(std::abs(n.linear_vel), cfg.v_max);
  EXPECT_LE(std::abs(n.angular_vel), cfg.omega_max);
}

TEST(Step, RandomCommandsNeverOverlapAndStayNormalized) {
  const OccupancyGrid g = load_map_file(std::string(TELEWAYPOINT_ASSET_DIR) + "/maps/trial_forward.map");
  const SimConfig cfg;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> v(-cfg.v_max, cfg.v_max), w(-cfg.omega_max, cfg.omega_max);
  for (int run = 0; run < 20; ++run) {
    RobotState s = initial_state(g, cfg);
    for (int i = 0; i < 500; ++i) {
      const VelocityCommand c{v(rng), w(rng)};
      const RobotState n = step(s, c, g, cfg);
      ASSERT_FALSE(disc_overlaps_obstacle(g, n.pose.position(), cfg.robot_radius));
      ASSERT_GT(n.pose.theta, -std::numbers::pi);
      ASSERT_LE(n.pose.theta, std::numbers::pi);
      ASSERT_GE(n.tick, s.tick);
      // Pure: the same inputs give the same bits.
      ASSERT_EQ(step(s, c, g, cfg), n);
      s = n;
    }
  }
}

TEST(Proximity, EmptyMapIsClear) {
  const OccupancyGrid g = open_room();
  EXPECT_FALSE(proximity_check(g, at(5.0, 5.0, 0.0), SimConfig{}));
}

TEST(Proximity, WallAheadTriggers) {
  const OccupancyGrid g = open_room();
  SimConfig cfg;
  cfg.proximity_range = 0.3;
  // Right border starts at x = 39 * 0.25; perimeter 0.1 m from it.
  const double wall = 39 * 0.25;
  EXPECT_TRUE(proximity_check(g, at(wall - cfg.robot_radius - 0.1, 5.0, 0.0), cfg));
}

TEST(Proximity, WallBehindDoesNot) {
  const OccupancyGrid g = open_room();
  SimConfig cfg;
  cfg.proximity_range = 0.3;
  const double wall = 39 * 0.25;
  EXPECT_FALSE(proximity_check(g, at(wall - cfg.robot_radius - 0.1, 5.0, std::numbers::pi), cfg));
}

TEST(DirectControl, Mapping) {
  const SimConfig cfg;
  EXPECT_EQ(apply_direct_control({1.0, 0.0}, false, cfg), (VelocityCommand{cfg.v_max, 0.0}));
  const VelocityCommand b = apply_direct_control({1.0, 0.0}, true, cfg);
  EXPECT_EQ(b.linear, 0.0);
  EXPECT_EQ(b.angular, 0.0);
  EXPECT_EQ(apply_direct_control({-1.0, 0.5}, true, cfg),
            (VelocityCommand{-cfg.v_max, -0.5 * cfg.omega_max}));
}

TEST(DirectControl, InputsClamped) {
  EXPECT_EQ(DriveInput::clamped(3.0, -2.0), (DriveInput{1.0, -1.0}));
}

TEST(DirectControl, BlockedNeverDrivesForward) {
  const SimConfig cfg;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 10000; ++i) {
    ASSERT_LE(apply_direct_control({u(rng), u(rng)}, true, cfg).linear, 0.0);
  }
}

TEST(SimConfig, Validation) {
  SimConfig cfg;
  cfg.dt = 0.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = SimConfig{};
  cfg.robot_radius = -1.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}
