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

#include "telewaypoint/selection.hpp"

using namespace telewaypoint;

namespace {

// 20 m x 20 m open floor (80 x 80 cells) with a 2 m square block at x 14..16.
Costmap floor_with_block() {
  const int n = 80;
  std::vector<CostCell> cells(n * n, CostCell::Free);
  for (int y = 36; y < 44; ++y)
    for (int x = 56; x < 64; ++x) cells[y * n + x] = CostCell::Occupied;
  return Costmap(n, n, 0.25, std::move(cells));
}

SelectionState aiming_at(const Costmap& cm, Point2D target) {
  // Straight down lands exactly under the hand.
  const ControllerPose down{{target.x, target.y, 1.2}, {0.0, 0.0, -1.0}};
  return update_aim(begin_aim(SelectionState{}), down, cm, ArcConfig{});
}

SelectionState prospective_at(const Costmap& cm, Point2D target) {
  return release_aim(aiming_at(cm, target));
}

}  // namespace

TEST(Arc, VerticalDropLandsUnderHand) {
  const ControllerPose down{{3.0, 4.0, 1.5}, {0.0, 0.0, -1.0}};
  const auto p = arc_landing(down, ArcConfig{});
  ASSERT_TRUE(p);
  EXPECT_NEAR(p->x, 3.0, 1e-12);
  EXPECT_NEAR(p->y, 4.0, 1e-12);
}

TEST(Arc, LevelFireMatchesClosedForm) {
  const ArcConfig cfg;
  for (double h : {0.3, 1.0, 1.2, 2.0}) {
    const ControllerPose level{{1.0, 2.0, h}, {1.0, 0.0, 0.0}};
    const auto p = arc_landing(level, cfg);
    ASSERT_TRUE(p);
    EXPECT_NEAR(p->x, 1.0 + cfg.launch_speed * std::sqrt(2.0 * h / cfg.gravity), 1e-4);
    EXPECT_NEAR(p->y, 2.0, 1e-12);
  }
}

TEST(Arc, NoLandingWithinFlightTime) {
  ArcConfig cfg;
  cfg.max_flight = 0.05;
  const ControllerPose up = ControllerPose::aimed({0.0, 0.0, 1.2}, 0.0, 0.5);
  EXPECT_FALSE(arc_landing(up, cfg));
}

TEST(Arc, LandingInObstacleIsInvalid) {
  const Costmap cm = floor_with_block();
  const ControllerPose down{{15.0, 10.0, 1.2}, {0.0, 0.0, -1.0}};
  EXPECT_FALSE(arc_project(down, cm, ArcConfig{}));
  const ControllerPose clear{{5.0, 10.0, 1.2}, {0.0, 0.0, -1.0}};
  EXPECT_TRUE(arc_project(clear, cm, ArcConfig{}));
}

TEST(Arc, RangeIncreasesWithPitchUpToOptimum) {
  const ArcConfig cfg;
  const Vec3 hand{0.0, 0.0, 1.2};
  double prev = -1.0;
  for (double deg = -90.0; deg <= 38.0; deg += 0.5) {
    const double pitch = deg * std::numbers::pi / 180.0;
    const auto p = arc_landing(ControllerPose::aimed(hand, 0.0, pitch), cfg);
    ASSERT_TRUE(p);
    const double range = std::hypot(p->x, p->y);
    if (deg > -90.0) {
      ASSERT_GT(range, prev) << deg;
    }
    prev = range;
  }
}

TEST(ControllerPose, Validation) {
  EXPECT_THROW((ControllerPose{{0, 0, 1}, {1, 1, 0}}.validate()), std::invalid_argument);
  EXPECT_THROW((ControllerPose{{0, 0, -1}, {1, 0, 0}}.validate()), std::invalid_argument);
  EXPECT_NO_THROW(ControllerPose::aimed({0, 0, 1}, 0.3, -0.2).validate());
}

TEST(Selection, ReleaseWithValidReticleProposes) {
  const Costmap cm = floor_with_block();
  const SelectionState s = prospective_at(cm, {3.0, 2.0});
  EXPECT_EQ(s.mode(), SelectionMode::Prospective);
  ASSERT_TRUE(s.prospective_target());
  EXPECT_NEAR(s.prospective_target()->x, 3.0, 1e-12);
  EXPECT_NEAR(s.prospective_target()->y, 2.0, 1e-12);
  EXPECT_FALSE(s.reticle());
  EXPECT_FALSE(s.confirmed_target());
}

TEST(Selection, ReleaseWithoutReticleIsIdle) {
  const SelectionState s = release_aim(begin_aim(SelectionState{}));
  EXPECT_EQ(s.mode(), SelectionMode::Idle);
}

TEST(Selection, ReleaseFromIdleIsIllegal) {
  EXPECT_THROW(release_aim(SelectionState{}), IllegalTransition);
}

TEST(Selection, ConfirmStartsNavigation) {
  const Costmap cm = floor_with_block();
  const ConfirmResult r = confirm(prospective_at(cm, {3.0, 2.0}));
  EXPECT_EQ(r.state.mode(), SelectionMode::Navigating);
  ASSERT_TRUE(r.state.confirmed_target());
  EXPECT_EQ(*r.state.confirmed_target(), r.request.target);
  EXPECT_NEAR(r.request.target.x, 3.0, 1e-12);
}

TEST(Selection, ConfirmFromIdleIsIllegal) {
  EXPECT_THROW(confirm(SelectionState{}), IllegalTransition);
}

TEST(Selection, ReaimWhileNavigatingKeepsNavigation) {
  const Costmap cm = floor_with_block();
  const SelectionState nav = confirm(prospective_at(cm, {3.0, 2.0})).state;
  const SelectionState aim = begin_aim(nav);
  EXPECT_EQ(aim.mode(), SelectionMode::Aiming);
  ASSERT_TRUE(aim.background_target());
  EXPECT_EQ(*aim.background_target(), *nav.confirmed_target());
  // An empty release falls back to the running navigation.
  const SelectionState back = release_aim(aim);
  EXPECT_EQ(back.mode(), SelectionMode::Navigating);
  EXPECT_EQ(*back.confirmed_target(), *nav.confirmed_target());
}

TEST(Selection, LastConfirmWins) {
  const Costmap cm = floor_with_block();
  const SelectionState first = confirm(prospective_at(cm, {3.0, 2.0})).state;
  const SelectionState aim = update_aim(begin_aim(first), ControllerPose{{8.0, 9.0, 1.2}, {0, 0, -1}}, cm,
                                       ArcConfig{});
  const ConfirmResult second = confirm(release_aim(aim));
  EXPECT_NEAR(second.state.confirmed_target()->x, 8.0, 1e-12);
  EXPECT_FALSE(second.state.background_target());
}

TEST(Selection, StopClearsEverything) {
  const Costmap cm = floor_with_block();
  for (const SelectionState& s :
       {SelectionState{}, aiming_at(cm, {3, 2}), prospective_at(cm, {3, 2}),
        confirm(prospective_at(cm, {3, 2})).state}) {
    const SelectionState t = stop(s);
    EXPECT_EQ(t.mode(), SelectionMode::Idle);
    EXPECT_EQ(t, SelectionState{});
  }
}

TEST(Selection, ArrivalEndsNavigation) {
  const Costmap cm = floor_with_block();
  EXPECT_EQ(arrive(confirm(prospective_at(cm, {3, 2})).state), SelectionState{});
}

TEST(Selection, TransitionTableIsExhaustive) {
  const Costmap cm = floor_with_block();
  const ControllerPose pose{{3.0, 2.0, 1.2}, {0, 0, -1}};
  const ArcConfig arc;
  const SelectionState states[] = {SelectionState{}, aiming_at(cm, {3, 2}), prospective_at(cm, {3, 2}),
                                   confirm(prospective_at(cm, {3, 2})).state};
  // Rows: Idle, Aiming, Prospective, Navigating. Columns: begin, update,
  // release, confirm. true = legal.
  const bool legal[4][4] = {
      {true, false, false, false},
      {false, true, true, false},
      {true, false, false, true},
      {true, false, false, false},
  };
  for (int m = 0; m < 4; ++m) {
    EXPECT_EQ(states[m].mode(), static_cast<SelectionMode>(m));
    auto check = [&](int col, auto&& f) {
      if (legal[m][col]) {
        EXPECT_NO_THROW(f()) << m << "," << col;
      } else {
        EXPECT_THROW(f(), IllegalTransition) << m << "," << col;
      }
    };
    check(0, [&] { return begin_aim(states[m]); });
    check(1, [&] { return update_aim(states[m], pose, cm, arc); });
    check(2, [&] { return release_aim(states[m]); });
    check(3, [&] { return confirm(states[m]); });
    EXPECT_NO_THROW(stop(states[m]));
  }
}

TEST(Selection, ModeInvariantsUnderRandomEvents) {
  const Costmap cm = floor_with_block();
  const ArcConfig arc;
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> ev(0, 5);
  std::uniform_real_distribution<double> yaw(-3.14, 3.14), pitch(-1.5, 0.6);
  SelectionState s;
  for (int i = 0; i < 20000; ++i) {
    try {
      switch (ev(rng)) {
        case 0: s = begin_aim(s); break;
        case 1: s = update_aim(s, ControllerPose::aimed({10.0, 10.0, 1.2}, yaw(rng), pitch(rng)), cm, arc); break;
        case 2: s = release_aim(s); break;
        case 3: s = confirm(s).state; break;
        case 4: s = stop(s); break;
        case 5: s = arrive(s); break;
      }
    } catch (const IllegalTransition&) {
    }
    ASSERT_EQ(s.prospective_target().has_value(), s.mode() == SelectionMode::Prospective);
    ASSERT_EQ(s.confirmed_target().has_value(), s.mode() == SelectionMode::Navigating);
    if (s.reticle()) ASSERT_EQ(s.mode(), SelectionMode::Aiming);
  }
}
