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

#include <random>

#include "oracles.hpp"
#include "telewaypoint/grid.hpp"
#include "telewaypoint/planner.hpp"

using namespace telewaypoint;

namespace {

const std::string kAssets = TELEWAYPOINT_ASSET_DIR;

OccupancyGrid forward_map() { return load_map_file(kAssets + "/maps/trial_forward.map"); }

double start_goal_cost(const OccupancyGrid& g) {
  const Costmap cm = inflate(g, 0.0);
  auto c = oracle::dijkstra(cm, g.cell_of(g.start_pose().position()), g.cell_of(g.goal_center()));
  return c ? c->value() : -1.0;
}

}  // namespace

TEST(LoadMap, MinimalMap) {
  const OccupancyGrid g = load_map("...\nS.T\n...\n");
  EXPECT_EQ(g.width(), 3);
  EXPECT_EQ(g.height(), 3);
  for (const Cell c : g.cells()) EXPECT_EQ(c, Cell::Free);
  // Rows are listed top down; the middle row is y = 1 either way.
  EXPECT_DOUBLE_EQ(g.start_pose().x, 0.5 * 0.25);
  EXPECT_DOUBLE_EQ(g.start_pose().y, 1.5 * 0.25);
  EXPECT_DOUBLE_EQ(g.start_pose().theta, 0.0);
  EXPECT_DOUBLE_EQ(g.goal_center().x, 2.5 * 0.25);
}

TEST(LoadMap, ResolutionHeader) {
  const OccupancyGrid g = load_map("res=0.5\nS.T\n");
  EXPECT_DOUBLE_EQ(g.resolution(), 0.5);
  EXPECT_DOUBLE_EQ(g.goal_center().x, 1.25);
}

TEST(LoadMap, StartFacesGoal) {
  const OccupancyGrid g = load_map("T..\n...\nS..\n");
  EXPECT_NEAR(g.start_pose().theta, std::numbers::pi / 2.0, 1e-12);
}

TEST(LoadMap, Malformed) {
  EXPECT_THROW(load_map("S..\n.T..\n"), MalformedMap);
  EXPECT_THROW(load_map("S.x\n..T\n"), MalformedMap);
  EXPECT_THROW(load_map("...\n..T\n"), MalformedMap);
  EXPECT_THROW(load_map("S.S\n..T\n"), MalformedMap);
  EXPECT_THROW(load_map("S..\n.TT\n"), MalformedMap);
  EXPECT_THROW(load_map(""), MalformedMap);
  EXPECT_THROW(load_map("res=-1\nS.T\n"), MalformedMap);
}

TEST(LoadMap, MidlineColumn) {
  const OccupancyGrid g = load_map("S.|..\n..|.T\n");
  EXPECT_DOUBLE_EQ(g.midline_x(), 2.5 * 0.25);
  EXPECT_THROW(load_map("S|.|.\n.|.|T\n"), MalformedMap);
}

TEST(LoadMap, ShippedMapIsSolvable) {
  const OccupancyGrid g = forward_map();
  EXPECT_GT(start_goal_cost(g), 0.0);
}

TEST(FormatMap, RoundTrip) {
  const OccupancyGrid g = forward_map();
  EXPECT_EQ(load_map(format_map(g)), g);
}

TEST(MirrorMap, Involution) {
  const OccupancyGrid g = forward_map();
  EXPECT_EQ(mirror_map(mirror_map(g)), g);
}

TEST(MirrorMap, SymmetricMapKeepsCells) {
  const OccupancyGrid g = load_map("#...#\nS.#.T\n#...#\n");
  EXPECT_EQ(mirror_map(g).cells(), g.cells());
}

TEST(MirrorMap, CoordinatesReflect) {
  const OccupancyGrid g = forward_map();
  const OccupancyGrid m = mirror_map(g);
  EXPECT_NEAR(m.start_pose().x, g.width_m() - g.start_pose().x, 1e-12);
  EXPECT_NEAR(m.goal_center().x, g.width_m() - g.goal_center().x, 1e-12);
  EXPECT_NEAR(m.midline_x(), g.width_m() - g.midline_x(), 1e-12);
  EXPECT_DOUBLE_EQ(m.start_pose().y, g.start_pose().y);
}

TEST(MirrorMap, PreservesOptimalCost) {
  const OccupancyGrid g = forward_map();
  EXPECT_NEAR(start_goal_cost(mirror_map(g)), start_goal_cost(g), 1e-9);
}

TEST(ReverseMap, Involution) {
  const OccupancyGrid g = forward_map();
  const OccupancyGrid rr = reverse_map(reverse_map(g));
  EXPECT_EQ(rr.start_pose().position(), g.start_pose().position());
  EXPECT_EQ(rr.goal_center(), g.goal_center());
  EXPECT_EQ(rr.cells(), g.cells());
}

TEST(ReverseMap, SwapsEndpointsAndReaims) {
  const OccupancyGrid g = forward_map();
  const OccupancyGrid r = reverse_map(g);
  EXPECT_EQ(r.start_pose().position(), g.goal_center());
  EXPECT_EQ(r.goal_center(), g.start_pose().position());
  EXPECT_NEAR(r.start_pose().theta, heading_toward(r.start_pose().position(), r.goal_center()), 1e-12);
  EXPECT_EQ(r.cells(), g.cells());
}

TEST(ReverseMap, PreservesOptimalCost) {
  const OccupancyGrid g = forward_map();
  EXPECT_NEAR(start_goal_cost(reverse_map(g)), start_goal_cost(g), 1e-9);
}

TEST(ReverseMap, MatchesShippedAsset) {
  EXPECT_EQ(reverse_map(forward_map()), load_map_file(kAssets + "/maps/trial_reverse.map"));
}

TEST(MapTransforms, PreserveCostOnRandomGrids) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 30; ++i) {
    const OccupancyGrid g = oracle::random_grid(rng, 15, 12, 0.2);
    const double c = start_goal_cost(g);
    EXPECT_EQ(start_goal_cost(mirror_map(g)), c);
    EXPECT_EQ(start_goal_cost(reverse_map(g)), c);
  }
}
