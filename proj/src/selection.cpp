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

#include "telewaypoint/selection.hpp"

#include <cmath>

namespace telewaypoint {

void ControllerPose::validate() const {
  const double n = std::sqrt(forward.x * forward.x + forward.y * forward.y +
                             forward.z * forward.z);
  if (std::abs(n - 1.0) > 1e-9) {
    throw std::invalid_argument("controller forward vector is not unit length");
  }
  if (!(position.z >= 0.0)) {
    throw std::invalid_argument("controller is below the ground plane");
  }
}

ControllerPose ControllerPose::aimed(Vec3 position, double yaw, double pitch) {
  const double c = std::cos(pitch);
  return {position, {c * std::cos(yaw), c * std::sin(yaw), std::sin(pitch)}};
}

void ArcConfig::validate() const {
  if (!(launch_speed > 0.0) || !(gravity > 0.0) || !(sample_step > 0.0) ||
      !(max_flight > 0.0) || !(hand_height >= 0.0)) {
    throw std::invalid_argument("ArcConfig: parameters must be positive");
  }
}

std::optional<Point2D> arc_landing(const ControllerPose& pose, const ArcConfig& cfg) {
  const Vec3 p0 = pose.position;
  const Vec3 v{cfg.launch_speed * pose.forward.x, cfg.launch_speed * pose.forward.y,
               cfg.launch_speed * pose.forward.z};
  const auto z_at = [&](double t) { return p0.z + v.z * t - 0.5 * cfg.gravity * t * t; };

  double lo = 0.0;
  double hi = -1.0;
  const auto steps = static_cast<long>(std::ceil(cfg.max_flight / cfg.sample_step));
  for (long k = 1; k <= steps; ++k) {
    const double t = std::min(k * cfg.sample_step, cfg.max_flight);
    if (z_at(t) <= 0.0) {
      hi = t;
      break;
    }
    lo = t;
  }
  if (hi < 0.0) return std::nullopt;

  // Bisection on the first ground crossing, well inside the 1e-6 m contract.
  double t = hi;
  for (int i = 0; i < 200; ++i) {
    t = 0.5 * (lo + hi);
    const double z = z_at(t);
    if (std::abs(z) < 1e-12 || hi - lo < 1e-15) break;
    (z > 0.0 ? lo : hi) = t;
  }
  return Point2D{p0.x + v.x * t, p0.y + v.y * t};
}

std::optional<Point2D> arc_project(const ControllerPose& pose, const Costmap& costmap,
                                   const ArcConfig& cfg) {
  pose.validate();
  const auto landing = arc_landing(pose, cfg);
  if (!landing || !costmap.traversable(costmap.cell_of(*landing))) return std::nullopt;
  return landing;
}

std::string_view to_string(SelectionMode mode) {
  switch (mode) {
    case SelectionMode::Idle:
      return "idle";
    case SelectionMode::Aiming:
      return "aiming";
    case SelectionMode::Prospective:
      return "prospective";
    case SelectionMode::Navigating:
      return "navigating";
  }
  return "unknown";
}

SelectionState begin_aim(const SelectionState& state) {
  SelectionState next;
  switch (state.mode_) {
    case SelectionMode::Aiming:
      throw IllegalTransition("begin_aim while already aiming");
    case SelectionMode::Idle:
      break;
    case SelectionMode::Prospective:
      next.background_ = state.background_;
      break;
    case SelectionMode::Navigating:
      next.background_ = state.confirmed_;
      break;
  }
  next.mode_ = SelectionMode::Aiming;
  return next;
}

SelectionState update_aim(const SelectionState& state, const ControllerPose& pose,
                          const Costmap& costmap, const ArcConfig& cfg) {
  if (state.mode_ != SelectionMode::Aiming) {
    throw IllegalTransition("update_aim outside of aiming");
  }
  SelectionState next = state;
  next.reticle_ = arc_project(pose, costmap, cfg);
  return next;
}

SelectionState release_aim(const SelectionState& state) {
  if (state.mode_ != SelectionMode::Aiming) {
    throw IllegalTransition("release_aim outside of aiming");
  }
  SelectionState next;
  if (state.reticle_) {
    next.mode_ = SelectionMode::Prospective;
    next.prospective_ = state.reticle_;
    next.background_ = state.background_;
  } else if (state.background_) {
    next.mode_ = SelectionMode::Navigating;
    next.confirmed_ = state.background_;
  }
  return next;
}

ConfirmResult confirm(const SelectionState& state) {
  if (state.mode_ != SelectionMode::Prospective) {
    throw IllegalTransition("confirm without a prospective target");
  }
  SelectionState next;
  next.mode_ = SelectionMode::Navigating;
  next.confirmed_ = state.prospective_;
  return {next, NavigationRequest{*state.prospective_}};
}

SelectionState stop(const SelectionState&) { return SelectionState{}; }

SelectionState arrive(const SelectionState& state) {
  if (state.mode_ == SelectionMode::Navigating) return SelectionState{};
  SelectionState next = state;
  next.background_.reset();
  return next;
}

}  // namespace telewaypoint
