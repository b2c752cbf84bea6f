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

#include "telewaypoint/bots.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "telewaypoint/stats.hpp"

namespace telewaypoint {

std::string_view to_string(BotKind k) {
  switch (k) {
    case BotKind::Direct:
      return "direct";
    case BotKind::Waypoint:
      return "waypoint";
    case BotKind::Switching:
      return "switching";
  }
  return "unknown";
}

void BotConfig::validate() const {
  if (!(reaction_delay >= 0.0) || !(reaction_jitter >= 0.0)) {
    throw std::invalid_argument("reaction delay must be >= 0");
  }
  if (!(waypoint_spacing > 0.0)) throw std::invalid_argument("waypoint spacing must be > 0");
  if (!(retarget_distance >= 0.0)) throw std::invalid_argument("retarget distance must be >= 0");
  if (!(path_clearance >= 0.0) || !(steer_clearance >= 0.0)) {
    throw std::invalid_argument("clearances must be >= 0");
  }
  if (!(steer_gain > 0.0) || !(align_tolerance > 0.0)) {
    throw std::invalid_argument("steering parameters must be > 0");
  }
  if (!(rt_min >= 0.0) || !(rt_max >= rt_min)) throw std::invalid_argument("bad response time range");
  if (!(error_rate >= 0.0 && error_rate <= 1.0)) throw std::invalid_argument("bad error rate");
}

std::vector<Point2D> reference_path(const OccupancyGrid& map, double clearance) {
  const Costmap costmap = inflate(map, clearance);
  const Point2D start = map.start_pose().position();
  const GridRoute route =
      search(costmap, costmap.cell_of(start), costmap.cell_of(map.goal_center()));
  std::vector<Point2D> points;
  points.push_back(start);
  for (std::size_t i = 1; i + 1 < route.cells.size(); ++i) {
    points.push_back(costmap.center_of(route.cells[i]));
  }
  points.push_back(map.goal_center());
  return points;
}

namespace {

double landing_range(double pitch, const ArcConfig& cfg) {
  const auto p = arc_landing(ControllerPose::aimed({0.0, 0.0, cfg.hand_height}, 0.0, pitch), cfg);
  return p ? p->x : -1.0;
}

}  // namespace

std::optional<double> pitch_for_range(double range, const ArcConfig& cfg) {
  if (range < 0.0) return std::nullopt;
  // Range-maximizing pitch by golden-section search; range is unimodal in pitch.
  double a = -std::numbers::pi / 2 + 1e-9;
  double b = std::numbers::pi / 2 - 1e-9;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int i = 0; i < 200 && b - a > 1e-12; ++i) {
    const double c = b - inv_phi * (b - a);
    const double d = a + inv_phi * (b - a);
    if (landing_range(c, cfg) < landing_range(d, cfg)) {
      a = c;
    } else {
      b = d;
    }
  }
  const double best = 0.5 * (a + b);
  if (range > landing_range(best, cfg)) return std::nullopt;
  double lo = -std::numbers::pi / 2;
  double hi = best;
  for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    (landing_range(mid, cfg) < range ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Bot::Bot(BotConfig cfg, const OccupancyGrid& map, const TrialConfig& trial, std::uint64_t seed)
    : cfg_((cfg.validate(), cfg)),
      map_(map),
      trial_(trial),
      costmap_(inflate(map, trial.inflation_radius)),
      route_(reference_path(map, std::max(cfg.path_clearance, trial.inflation_radius))),
      rng_(seed),
      method_(cfg.kind == BotKind::Waypoint ? ControlMethod::Waypoint : ControlMethod::Direct),
      spacing_(cfg.waypoint_spacing) {
  route_s_.assign(route_.size(), 0.0);
  for (std::size_t i = 1; i < route_.size(); ++i) {
    route_s_[i] = route_s_[i - 1] + distance(route_[i - 1], route_[i]);
  }
}

double Bot::draw() { return unit_uniform(rng_); }

void Bot::observe(const StateFrame& frame) {
  frame_ = frame;
  for (const auto& s : frame.active_stimuli) {
    if (std::find(seen_stimuli_.begin(), seen_stimuli_.end(), s.id) != seen_stimuli_.end()) continue;
    seen_stimuli_.push_back(s.id);
    // Scheduled in act(), which knows the current time.
    answers_.push_back({s.id, s.direction, SimTime(-1)});
  }
}

void Bot::refused(const WireCommand&) {}

void Bot::answer_stimuli(SimTime now, std::vector<WireCommand>& out) {
  for (auto& a : answers_) {
    if (a.at == SimTime(-1)) {
      a.at = now + from_seconds(cfg_.rt_min + (cfg_.rt_max - cfg_.rt_min) * draw());
      if (draw() < cfg_.error_rate) a.button = a.button == Arrow::Left ? Arrow::Right : Arrow::Left;
    }
  }
  for (auto it = answers_.begin(); it != answers_.end();) {
    if (it->at <= now) {
      out.push_back(cmd::StimulusResponse{it->button, it->id});
      it = answers_.erase(it);
    } else {
      ++it;
    }
  }
}

std::size_t Bot::advance_progress(Point2D p) {
  // Nearest route point within a short window ahead; progress never regresses.
  std::size_t best = progress_;
  double best_d = distance(p, route_[progress_]);
  for (std::size_t j = progress_ + 1; j < route_.size() && route_s_[j] - route_s_[progress_] < 3.0; ++j) {
    const double d = distance(p, route_[j]);
    if (d < best_d) {
      best_d = d;
      best = j;
    }
  }
  progress_ = best;
  return progress_;
}

bool Bot::clear_segment(Point2D a, Point2D b, double clearance) const {
  const double len = distance(a, b);
  const int n = std::max(1, static_cast<int>(std::ceil(len / 0.05)));
  for (int i = 0; i <= n; ++i) {
    const double t = static_cast<double>(i) / n;
    const Point2D q{a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t};
    if (obstacle_clearance(map_, q, clearance) < clearance) return false;
  }
  return true;
}

std::vector<WireCommand> Bot::act(SimTime now) {
  std::vector<WireCommand> out;
  if (!frame_ || frame_->phase != TrialPhase::Running) return out;
  answer_stimuli(now, out);
  if (now < next_decision_) return out;
  next_decision_ = now + from_seconds(cfg_.reaction_delay + cfg_.reaction_jitter * draw());

  if (cfg_.kind == BotKind::Switching && method_ == ControlMethod::Direct &&
      (frame_->delay_onset || frame_->delay_active)) {
    out.push_back(cmd::Drive{DriveInput{}});
    out.push_back(cmd::SwitchMethod{ControlMethod::Waypoint});
    method_ = ControlMethod::Waypoint;
  }
  if (method_ == ControlMethod::Direct) {
    drive(now, out);
  } else {
    navigate(now, out);
  }
  return out;
}

void Bot::drive(SimTime wall, std::vector<WireCommand>& out) {
  const StateFrame& f = *frame_;
  const Point2D p = f.robot.pose.position();
  const SimTime now = from_seconds(f.time);
  const std::size_t at = advance_progress(p);

  // Furthest reference point in view with room to spare. When the gate is
  // holding the robot, pick the furthest nearby point it could face without
  // the warning, as an operator turns until the banner clears.
  std::size_t target = std::min(at + 1, route_.size() - 1);
  for (std::size_t j = route_.size(); j-- > at + 1;) {
    if (route_s_[j] - route_s_[at] > (f.proximity_warning ? 3.0 : 8.0)) continue;
    if (f.proximity_warning) {
      RobotState facing = f.robot;
      facing.pose.theta = std::atan2(route_[j].y - p.y, route_[j].x - p.x);
      if (proximity_check(map_, facing, trial_.sim)) continue;
      if (!clear_segment(p, route_[j], trial_.sim.robot_radius + 0.02)) continue;
    } else if (!clear_segment(p, route_[j], cfg_.steer_clearance)) {
      continue;
    }
    target = j;
    break;
  }
  const Point2D goal = route_[target];
  const double err = normalize_angle(std::atan2(goal.y - p.y, goal.x - p.x) - f.robot.pose.theta);
  // Lag shows as the time a new turn takes to appear; steer gentler under it
  // so the loop does not overshoot.
  if (turn_pending_ && f.robot.angular_vel * turn_sign_ > 0.05) {
    latency_ = wall - turn_sent_at_;
    turn_pending_ = false;
  }
  const double lag = to_seconds(latency_);
  const double gain = lag > 0.1 ? std::min(cfg_.steer_gain, 0.6 / lag) : cfg_.steer_gain;
  const double omega = gain * err;
  double x = std::clamp(-omega / trial_.sim.omega_max, -1.0, 1.0);
  const double e = std::abs(err);
  double y = e <= cfg_.align_tolerance
                 ? 1.0
                 : std::max(0.0, (2.0 * cfg_.align_tolerance - e) / cfg_.align_tolerance);

  // The proximity gate holds the robot: turn in place, back off if it persists.
  if (f.proximity_warning && y > 0.0) {
    if (blocked_since_ < SimTime::zero()) blocked_since_ = now;
    if (now - blocked_since_ > from_seconds(1.0)) {
      reverse_until_ = now + from_seconds(0.6);
      blocked_since_ = SimTime(-1);
    }
  } else {
    blocked_since_ = SimTime(-1);
  }
  if (now < reverse_until_) {
    y = -0.6;
    x = 0.0;
  }
  const int sign = x < -0.05 ? 1 : (x > 0.05 ? -1 : 0);
  if (sign != 0 && sign != turn_sign_ && !turn_pending_) {
    turn_pending_ = true;
    turn_sent_at_ = wall;
  }
  if (sign != 0) turn_sign_ = sign;
  out.push_back(cmd::Drive{DriveInput::clamped(y, x)});
}

void Bot::navigate(SimTime now, std::vector<WireCommand>& out) {
  const StateFrame& f = *frame_;
  const Point2D p = f.robot.pose.position();

  if (sent_target_) {
    const bool accepted = f.navigating && f.confirmed_target &&
                          distance(*f.confirmed_target, *sent_target_) < 1e-9;
    const bool rejected =
        std::any_of(f.notices.begin(), f.notices.end(),
                    [](const std::string& n) { return n.rfind("target rejected", 0) == 0; });
    if (accepted) {
      // The operator learns the round trip from how long the disk took to turn green.
      latency_ = now - sent_at_;
      active_target_ = sent_target_;
      sent_target_.reset();
      ++confirmations_;
      spacing_ = cfg_.waypoint_spacing;
    } else if (rejected) {
      sent_target_.reset();
      spacing_ = std::max(0.5, spacing_ / 2.0);
    } else if (now - sent_at_ > from_seconds(6.0)) {
      sent_target_.reset();
    } else {
      return;
    }
  }

  bool need = false;
  if (!f.navigating) {
    active_target_.reset();
    need = true;
  } else if (active_target_ && cfg_.retarget_distance > 0.0 &&
             distance(p, *active_target_) <=
                 cfg_.retarget_distance + trial_.sim.v_max * to_seconds(latency_) &&
             distance(*active_target_, map_.goal_center()) > 1e-9) {
    need = true;
  }
  if (!need) return;

  const std::size_t at = advance_progress(p);
  // Spacing counts from the target still being driven to, if any.
  std::size_t base = at;
  if (active_target_) {
    for (std::size_t k = at; k < route_.size(); ++k) {
      if (distance(route_[k], *active_target_) < distance(route_[base], *active_target_)) base = k;
    }
  }
  const double want = route_s_[base] + spacing_;
  std::size_t j = at;
  while (j + 1 < route_.size() && route_s_[j] < want) ++j;

  // The floor at the target only has to be in view; the planner finds the way.
  const double sight = 0.05;
  const Vec3 hand{p.x, p.y, trial_.arc.hand_height};
  for (; j > at; --j) {
    const Point2D q = route_[j];
    if (!costmap_.traversable(costmap_.cell_of(q)) || !clear_segment(p, q, sight)) continue;
    const auto pitch = pitch_for_range(distance(p, q), trial_.arc);
    if (!pitch) continue;
    const ControllerPose pose =
        ControllerPose::aimed(hand, std::atan2(q.y - p.y, q.x - p.x), *pitch);
    const auto landing = arc_project(pose, costmap_, trial_.arc);
    if (!landing) continue;
    if (active_target_ && distance(*landing, *active_target_) < 0.3) return;
    out.push_back(cmd::AimBegin{});
    out.push_back(cmd::AimUpdate{pose});
    out.push_back(cmd::AimRelease{});
    out.push_back(cmd::Confirm{});
    sent_target_ = landing;
    sent_at_ = now;
    return;
  }
}

TrialResult run_bot_trial(TrialSession& session, Bot& bot, double time_limit) {
  while (!session.finished()) {
    if (to_seconds(session.now()) >= time_limit) {
      session.abort();
      break;
    }
    session.tick();
    for (const StateFrame& f : session.poll_frames()) bot.observe(f);
    if (session.finished()) break;
    for (const WireCommand& c : bot.act(session.now())) {
      try {
        session.receive_line(encode_command(c));
      } catch (const std::logic_error&) {
        bot.refused(c);
      }
    }
  }
  return session.result();
}

const BotConfig& BotSuite::for_trial(const TrialSpec& spec) const {
  switch (spec.control) {
    case ControlMethod::Direct:
      return direct;
    case ControlMethod::Waypoint:
      return waypoint;
    case ControlMethod::Switchable:
      return switching;
  }
  return direct;
}

void run_bot_session(ExperimentSession& session, const BotSuite& bots, double time_limit) {
  while (session.trials_started() < session.plan().trials.size()) {
    TrialSession& trial = session.start_next_trial();
    const std::size_t index = session.trials_started() - 1;
    const std::uint64_t seed = trial_seed(session.plan().rng_seed, index) ^ 0x626f74ULL;
    Bot bot(bots.for_trial(trial.spec()), trial.map(), trial.config(), seed);
    run_bot_trial(trial, bot, time_limit);
    session.conclude_trial();
    if (bots.answer_questionnaires && !trial.spec().bonus) {
      std::mt19937_64 rng(seed ^ 0x71756573ULL);
      std::vector<int> sus(kSusItems);
      for (auto& v : sus) v = 1 + static_cast<int>(unit_uniform(rng) * 5.0);
      std::vector<int> tlx(kTlxScales);
      for (auto& v : tlx) v = 5 * static_cast<int>(unit_uniform(rng) * 21.0);
      session.submit_questionnaire(index, Instrument::SUS, sus);
      session.submit_questionnaire(index, Instrument::TLX, tlx);
    }
  }
}

double DelayExperiment::mean_ratio() const {
  double a = 0.0;
  double b = 0.0;
  for (const auto& r : runs) {
    a += r.undelayed.completion_time;
    b += r.delayed.completion_time;
  }
  return b / a;
}

bool DelayExperiment::all_completed() const {
  return std::all_of(runs.begin(), runs.end(), [](const PairedRun& r) {
    return r.undelayed.completed && r.delayed.completed;
  });
}

DelayExperiment run_delay_experiment(const OccupancyGrid& map, const BotConfig& bot,
                                     const TrialConfig& trial, std::size_t runs,
                                     std::uint64_t seed, double delay, double time_limit) {
  if (bot.kind == BotKind::Switching) {
    throw std::invalid_argument("the delay experiment runs a single control method");
  }
  const ControlMethod method =
      bot.kind == BotKind::Direct ? ControlMethod::Direct : ControlMethod::Waypoint;
  DelayExperiment out;
  out.kind = bot.kind;
  for (std::size_t i = 0; i < runs; ++i) {
    PairedRun pair;
    pair.seed = trial_seed(seed, i);
    for (int delayed = 0; delayed < 2; ++delayed) {
      const TrialSpec spec{method, delayed ? delay : 0.0, MapVariant::Forward, false};
      TrialSession session(map, spec, trial, pair.seed);
      Bot b(bot, session.map(), trial, pair.seed ^ 0x626f74ULL);
      (delayed ? pair.delayed : pair.undelayed) = run_bot_trial(session, b, time_limit);
    }
    out.runs.push_back(std::move(pair));
  }
  return out;
}

}  // namespace telewaypoint
