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

#include "telewaypoint/session.hpp"

#include <cmath>
#include <cstring>

#include <fmt/format.h>

#include "telewaypoint/stats.hpp"

namespace telewaypoint {

using nlohmann::json;

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

json channel_json(const ChannelConfig& c) {
  return {{"uplink_delay", c.uplink_delay},
          {"downlink_delay", c.downlink_delay},
          {"jitter", c.jitter},
          {"jitter_seed", c.jitter_seed}};
}

ChannelConfig channel_from_json(const json& j) {
  ChannelConfig c;
  c.uplink_delay = j.at("uplink_delay").get<double>();
  c.downlink_delay = j.at("downlink_delay").get<double>();
  c.jitter = j.value("jitter", 0.0);
  c.jitter_seed = j.value("jitter_seed", std::uint64_t{0});
  return c;
}

std::string hex(std::uint64_t v) { return fmt::format("{:016x}", v); }

}  // namespace

void TrialConfig::validate() const {
  sim.validate();
  arc.validate();
  if (!(inflation_radius >= 0.0)) throw std::invalid_argument("inflation_radius must be >= 0");
  if (!(pursuit.lookahead > 0.0) || !(pursuit.gain > 0.0) || !(pursuit.arrive_tolerance > 0.0)) {
    throw std::invalid_argument("pursuit parameters must be positive");
  }
  if (delayed_links) delayed_links->validate();
  if (!(jitter >= 0.0)) throw std::invalid_argument("jitter must be >= 0");
  if (bonus_initial_method == ControlMethod::Switchable) {
    throw std::invalid_argument("bonus trial must start in direct or waypoint control");
  }
  if (!(max_duration >= 0.0)) throw std::invalid_argument("max_duration must be >= 0");
  if (checkpoint_interval < 0) throw std::invalid_argument("checkpoint_interval must be >= 0");
}

ChannelConfig TrialConfig::initial_links(const TrialSpec& spec) const {
  if (spec.bonus || spec.delay <= 0.0) return {0.0, 0.0, jitter, 0};
  return delayed_links_for(spec);
}

ChannelConfig TrialConfig::delayed_links_for(const TrialSpec& spec) const {
  if (delayed_links) {
    ChannelConfig c = *delayed_links;
    if (c.jitter == 0.0) c.jitter = jitter;
    return c;
  }
  return {spec.delay, 0.0, jitter, 0};
}

json to_json(const TrialConfig& c) {
  json j;
  j["sim"] = {{"dt", c.sim.dt},
              {"v_max", c.sim.v_max},
              {"omega_max", c.sim.omega_max},
              {"robot_radius", c.sim.robot_radius},
              {"proximity_range", c.sim.proximity_range},
              {"proximity_fov", c.sim.proximity_fov}};
  j["pursuit"] = {{"lookahead", c.pursuit.lookahead},
                  {"gain", c.pursuit.gain},
                  {"arrive_tolerance", c.pursuit.arrive_tolerance}};
  j["arc"] = {{"launch_speed", c.arc.launch_speed},
              {"gravity", c.arc.gravity},
              {"sample_step", c.arc.sample_step},
              {"max_flight", c.arc.max_flight},
              {"hand_height", c.arc.hand_height}};
  j["inflation_radius"] = c.inflation_radius;
  j["delayed_links"] = c.delayed_links ? channel_json(*c.delayed_links) : json(nullptr);
  j["jitter"] = c.jitter;
  j["bonus_initial_method"] = to_string(c.bonus_initial_method);
  j["max_duration"] = c.max_duration;
  j["checkpoint_interval"] = c.checkpoint_interval;
  return j;
}

TrialConfig trial_config_from_json(const json& j) {
  TrialConfig c;
  const auto& s = j.at("sim");
  c.sim = {s.at("dt").get<double>(),          s.at("v_max").get<double>(),
           s.at("omega_max").get<double>(),   s.at("robot_radius").get<double>(),
           s.at("proximity_range").get<double>(), s.at("proximity_fov").get<double>()};
  const auto& p = j.at("pursuit");
  c.pursuit = {p.at("lookahead").get<double>(), p.at("gain").get<double>(),
               p.at("arrive_tolerance").get<double>()};
  const auto& a = j.at("arc");
  c.arc = {a.at("launch_speed").get<double>(), a.at("gravity").get<double>(),
           a.at("sample_step").get<double>(), a.at("max_flight").get<double>(),
           a.at("hand_height").get<double>()};
  c.inflation_radius = j.at("inflation_radius").get<double>();
  if (j.contains("delayed_links") && !j["delayed_links"].is_null()) {
    c.delayed_links = channel_from_json(j["delayed_links"]);
  }
  c.jitter = j.value("jitter", 0.0);
  c.bonus_initial_method = parse_method(j.at("bonus_initial_method").get<std::string>());
  c.max_duration = j.value("max_duration", 0.0);
  c.checkpoint_interval = j.value("checkpoint_interval", 50);
  c.validate();
  return c;
}

json to_json(const TrialSpec& s) {
  return {{"control", to_string(s.control)},
          {"delay", s.delay},
          {"map_variant", to_string(s.map_variant)},
          {"bonus", s.bonus}};
}

TrialSpec trial_spec_from_json(const json& j) {
  TrialSpec s;
  s.control = parse_method(j.at("control").get<std::string>());
  s.delay = j.at("delay").get<double>();
  s.map_variant = parse_variant(j.at("map_variant").get<std::string>());
  s.bonus = j.at("bonus").get<bool>();
  return s;
}

json to_json(const ExperimentPlan& p) {
  json trials = json::array();
  for (const auto& t : p.trials) trials.push_back(to_json(t));
  return {{"participant_id", p.participant_id},
          {"order", to_string(p.order)},
          {"rng_seed", p.rng_seed},
          {"trials", trials}};
}

ExperimentPlan plan_from_json(const json& j) {
  ExperimentPlan p;
  p.participant_id = j.at("participant_id").get<std::string>();
  p.order = parse_order(j.at("order").get<std::string>());
  p.rng_seed = j.at("rng_seed").get<std::uint64_t>();
  for (const auto& t : j.at("trials")) p.trials.push_back(trial_spec_from_json(t));
  validate_plan(p);
  return p;
}

json to_json(const TrialResult& r) {
  json responses = json::array();
  for (const auto& e : r.responses) {
    responses.push_back({{"id", e.id},
                         {"direction", to_string(e.direction)},
                         {"spawn_time", e.spawn_time},
                         {"response_time", e.response_time ? json(*e.response_time) : json(nullptr)},
                         {"correct", e.correct ? json(*e.correct) : json(nullptr)}});
  }
  json usage = json::object();
  for (const auto& [m, sec] : r.usage_seconds) usage[std::string(to_string(m))] = sec;
  return {{"completed", r.completed},
          {"completion_time", r.completion_time},
          {"distance", r.distance_travelled},
          {"errors", r.errors_count},
          {"collision_clamps", r.collision_clamps},
          {"usage_seconds", usage},
          {"responses", responses}};
}

std::uint64_t hash_state(std::uint64_t h, const RobotState& s) {
  const auto mix = [&h](const void* data, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 0x100000001b3ULL;
    }
  };
  const double values[] = {s.pose.x, s.pose.y, s.pose.theta, s.linear_vel, s.angular_vel};
  for (double v : values) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    mix(&bits, sizeof bits);
  }
  const std::int64_t tick = s.tick;
  mix(&tick, sizeof tick);
  const unsigned char flags[] = {static_cast<unsigned char>(s.proximity_blocked),
                                 static_cast<unsigned char>(s.collision_clamped)};
  mix(flags, sizeof flags);
  return h;
}

namespace {

constexpr std::uint64_t kHashSeed = 0xcbf29ce484222325ULL;

SimTime dt_of(const SimConfig& sim) {
  const SimTime dt = from_seconds(sim.dt);
  if (dt <= SimTime::zero()) throw std::invalid_argument("dt rounds to zero nanoseconds");
  return dt;
}

ControlMethod initial_method(const TrialSpec& spec, const TrialConfig& cfg) {
  if (spec.bonus) return cfg.bonus_initial_method;
  return spec.control;
}

json pose_json(const Pose2D& p) { return json::array({p.x, p.y, p.theta}); }

}  // namespace

TrialSession::TrialSession(OccupancyGrid map, TrialSpec spec, TrialConfig cfg, std::uint64_t seed,
                           EventLog* event_log, TrialIdentity identity)
    : map_(std::move(map)),
      costmap_((cfg.validate(), inflate(map_, cfg.inflation_radius))),
      spec_(spec),
      cfg_(std::move(cfg)),
      seed_(seed),
      log_(event_log),
      identity_(std::move(identity)),
      dt_(dt_of(cfg_.sim)),
      state_(initial_state(map_, cfg_.sim)),
      active_(initial_method(spec_, cfg_)),
      uplink_(from_seconds(cfg_.initial_links(spec_).uplink_delay),
              from_seconds(cfg_.initial_links(spec_).jitter), seed ^ 0x75706c696e6bULL),
      downlink_(from_seconds(cfg_.initial_links(spec_).downlink_delay),
                from_seconds(cfg_.initial_links(spec_).jitter), seed ^ 0x646f776e6cULL),
      scheduler_(seed),
      start_left_of_midline_(map_.start_pose().x < map_.midline_x()),
      hash_(kHashSeed) {
  if (spec_.bonus != (spec_.control == ControlMethod::Switchable)) {
    throw std::invalid_argument("bonus trials, and only bonus trials, are switchable");
  }
  if (spec_.delay < 0.0) throw std::invalid_argument("trial delay must be >= 0");
  if (spec_.bonus) {
    usage_ticks_[ControlMethod::Direct] = 0;
    usage_ticks_[ControlMethod::Waypoint] = 0;
  }
  const Pose2D& s = map_.start_pose();
  log(log_kind::kTrialStart,
      {{"participant", identity_.participant_id},
       {"order", to_string(identity_.order)},
       {"index", identity_.trial_index},
       {"spec", to_json(spec_)},
       {"seed", seed_},
       {"config", to_json(cfg_)},
       {"map",
        {{"text", format_map(map_)},
         {"start", pose_json(s)},
         {"goal", json::array({map_.goal_center().x, map_.goal_center().y})},
         {"goal_radius", map_.goal_radius()},
         {"midline_x", map_.midline_x()}}},
       {"method", to_string(active_)}});
  last_frame_ = make_frame({}, false);
}

void TrialSession::log(std::string_view kind, json data) {
  if (log_) log_->append(now_, kind, std::move(data));
}

void TrialSession::receive_line(std::string_view line) { receive(decode_command(line)); }

void TrialSession::receive(const WireCommand& command) {
  if (finished()) throw TrialOver("trial is over");
  if (const auto* r = std::get_if<cmd::StimulusResponse>(&command)) {
    // Timed on receipt, outside the link delay.
    std::size_t target = 0;
    if (r->stimulus_id) {
      auto it = std::find_if(stimuli_.begin(), stimuli_.end(),
                             [&](const StimulusEvent& e) { return e.id == *r->stimulus_id; });
      if (it == stimuli_.end()) {
        throw std::invalid_argument(fmt::format("no stimulus with id {}", *r->stimulus_id));
      }
      target = static_cast<std::size_t>(it - stimuli_.begin());
    } else {
      if (!active_stimulus_) throw std::invalid_argument("no stimulus is showing");
      target = *active_stimulus_;
    }
    const double now = to_seconds(now_);
    StimulusEvent answered = record_response(stimuli_[target], r->button, now);
    log(log_kind::kCommand, to_json(command));
    stimuli_[target] = answered;
    const double rt = *answered.response_time - answered.spawn_time;
    pending_acks_.push_back({answered.id, *answered.correct, rt});
    log(log_kind::kResponse,
        {{"stimulus", answered.id}, {"button", to_string(r->button)}, {"correct", *answered.correct},
         {"rt", rt}});
    return;
  }
  if (std::holds_alternative<cmd::SwitchMethod>(command) && !spec_.bonus) {
    throw NotBonusTrial("method switching is only available in the bonus trial");
  }
  log(log_kind::kCommand, to_json(command));
  uplink_.send(command, now_);
}

void TrialSession::switch_method(ControlMethod to, std::vector<std::string>& notices) {
  if (to == active_) return;
  // Leaving a method drops everything it was doing.
  selection_ = stop(selection_);
  path_.reset();
  drive_ = {};
  const ControlMethod from = active_;
  active_ = to;
  log(log_kind::kMethodSwitch, {{"from", to_string(from)}, {"to", to_string(to)}});
  notices.push_back(fmt::format("switched to {} control", to_string(to)));
}

void TrialSession::apply(const WireCommand& command, std::vector<std::string>& notices) {
  const auto need = [&](ControlMethod m) {
    if (active_ == m) return true;
    notices.push_back(fmt::format("{} ignored: {} control is active", command_kind(command),
                                  to_string(active_)));
    return false;
  };
  const auto guarded = [&](auto&& transition) {
    try {
      transition();
    } catch (const IllegalTransition& e) {
      notices.push_back(e.what());
    }
  };
  std::visit(
      Overloaded{
          [&](const cmd::Drive& d) {
            if (need(ControlMethod::Direct)) drive_ = d.input;
          },
          [&](const cmd::AimBegin&) {
            if (need(ControlMethod::Waypoint)) guarded([&] { selection_ = begin_aim(selection_); });
          },
          [&](const cmd::AimUpdate& a) {
            if (need(ControlMethod::Waypoint)) {
              guarded([&] { selection_ = update_aim(selection_, a.pose, costmap_, cfg_.arc); });
            }
          },
          [&](const cmd::AimRelease&) {
            if (need(ControlMethod::Waypoint)) guarded([&] { selection_ = release_aim(selection_); });
          },
          [&](const cmd::Confirm&) {
            if (!need(ControlMethod::Waypoint)) return;
            guarded([&] {
              ConfirmResult r = confirm(selection_);
              selection_ = r.state;
              try {
                path_ = plan(costmap_, state_.pose.position(), r.request.target);
              } catch (const PlanningError& e) {
                notices.push_back(fmt::format("target rejected: {}", e.what()));
                selection_ = stop(selection_);
                path_.reset();
              }
            });
          },
          [&](const cmd::StopGrip&) {
            selection_ = stop(selection_);
            path_.reset();
            drive_ = {};
          },
          [&](const cmd::SwitchMethod& s) { switch_method(s.to, notices); },
          [&](const cmd::StimulusResponse&) {},
      },
      command);
}

void TrialSession::finish(TrialPhase phase) {
  phase_ = phase;
  completion_time_ = to_seconds(now_);
  log(log_kind::kTrialEnd, {{"phase", to_string(phase)},
                            {"tick", state_.tick},
                            {"hash", hex(hash_)},
                            {"pose", pose_json(state_.pose)},
                            {"result", to_json(result())}});
}

void TrialSession::abort() {
  if (finished()) throw TrialOver("trial is over");
  finish(TrialPhase::Aborted);
  last_frame_ = make_frame({"trial aborted"}, false);
  downlink_.send(last_frame_, now_);
}

const StateFrame& TrialSession::tick(SimTime now) {
  if (now != now_ + dt_) {
    throw std::invalid_argument(fmt::format("tick at {} ns is not the next step after {} ns",
                                            now.count(), now_.count()));
  }
  return tick();
}

void TrialSession::advance_to(SimTime until) {
  while (now_ + dt_ <= until) tick();
}

const StateFrame& TrialSession::tick() {
  now_ += dt_;
  std::vector<Envelope<WireCommand>> delivered = uplink_.poll_envelopes(now_);
  if (finished()) {
    downlink_.poll(now_);
    return last_frame_;
  }
  std::vector<std::string> notices;
  for (const auto& e : delivered) apply(e.payload, notices);

  VelocityCommand command{};
  if (active_ == ControlMethod::Direct) {
    command = apply_direct_control(drive_, state_.proximity_blocked, cfg_.sim);
  } else if (path_) {
    const FollowOutput out = follow(*path_, state_, cfg_.sim, cfg_.pursuit);
    if (out.arrived) {
      path_.reset();
      selection_ = arrive(selection_);
    } else {
      command = out.command;
    }
  }
  const Point2D before = state_.pose.position();
  state_ = step(state_, command, map_, cfg_.sim);
  distance_ += distance(before, state_.pose.position());
  if (state_.collision_clamped) ++collisions_;
  hash_ = hash_state(hash_, state_);
  if (spec_.bonus) ++usage_ticks_[active_];

  const double t = to_seconds(now_);
  while (scheduler_.peek_time() <= t) {
    StimulusEvent e = scheduler_.pop();
    const double scheduled = e.spawn_time;
    e.spawn_time = t;
    stimuli_.push_back(e);
    active_stimulus_ = stimuli_.size() - 1;
    log(log_kind::kStimulus, {{"stimulus", e.id},
                              {"direction", to_string(e.direction)},
                              {"scheduled", scheduled},
                              {"spawn_time", t}});
  }

  bool onset = false;
  if (spec_.bonus && !onset_fired_) {
    const bool left = state_.pose.x < map_.midline_x();
    if (left != start_left_of_midline_) {
      const ChannelConfig links = cfg_.delayed_links_for(spec_);
      uplink_.set_delay(from_seconds(links.uplink_delay), now_);
      downlink_.set_delay(from_seconds(links.downlink_delay), now_);
      onset_fired_ = true;
      onset = true;
      log(log_kind::kDelayChange, {{"uplink_delay", links.uplink_delay},
                                   {"downlink_delay", links.downlink_delay},
                                   {"reason", "midline"},
                                   {"tick", state_.tick},
                                   {"pose", pose_json(state_.pose)}});
      notices.push_back(fmt::format("communication delay of {} s is now in effect",
                                    links.uplink_delay + links.downlink_delay));
    }
  }

  if (cfg_.checkpoint_interval > 0 && state_.tick % cfg_.checkpoint_interval == 0) {
    log(log_kind::kCheckpoint,
        {{"tick", state_.tick}, {"hash", hex(hash_)}, {"pose", pose_json(state_.pose)}});
  }

  if (distance(state_.pose.position(), map_.goal_center()) <= map_.goal_radius()) {
    finish(TrialPhase::Complete);
  } else if (cfg_.max_duration > 0.0 && t >= cfg_.max_duration) {
    finish(TrialPhase::Aborted);
    notices.push_back("trial timed out");
  }

  last_frame_ = make_frame(std::move(notices), onset);
  downlink_.send(last_frame_, now_);
  return last_frame_;
}

std::vector<StateFrame> TrialSession::poll_frames() { return downlink_.poll(now_); }

StateFrame TrialSession::make_frame(std::vector<std::string> notices, bool onset) {
  StateFrame f;
  f.tick = now_ / dt_;
  f.time = to_seconds(now_);
  f.robot = state_;
  f.proximity_warning = state_.proximity_blocked;
  f.active_method = active_;
  f.selection_mode = selection_.mode();
  f.reticle = selection_.reticle();
  f.prospective_target = selection_.prospective_target();
  f.confirmed_target = selection_.confirmed_target();
  if (!f.confirmed_target && path_) f.confirmed_target = selection_.background_target();
  f.navigating = path_.has_value();
  if (path_) f.path = path_->waypoints;
  if (active_stimulus_ && !stimuli_[*active_stimulus_].response_time) {
    const auto& e = stimuli_[*active_stimulus_];
    f.active_stimuli.push_back({e.id, e.direction, e.spawn_time});
  }
  f.acks = std::move(pending_acks_);
  pending_acks_.clear();
  f.phase = phase_;
  f.delay_onset = onset;
  f.delay_active = uplink_.delay() > SimTime::zero() || downlink_.delay() > SimTime::zero();
  f.notices = std::move(notices);
  if (phase_ == TrialPhase::Complete && !spec_.bonus) f.questionnaires_due = {"SUS", "TLX"};
  return f;
}

TrialResult TrialSession::result() const {
  TrialResult r;
  r.completed = phase_ == TrialPhase::Complete;
  r.completion_time = finished() ? completion_time_ : to_seconds(now_);
  r.distance_travelled = distance_;
  r.responses = stimuli_;
  for (const auto& e : stimuli_) {
    if (e.correct && !*e.correct) ++r.errors_count;
  }
  for (const auto& [m, ticks] : usage_ticks_) {
    r.usage_seconds[m] = static_cast<double>(ticks) * to_seconds(dt_);
  }
  r.collision_clamps = collisions_;
  return r;
}

OccupancyGrid map_for_variant(const OccupancyGrid& base, MapVariant v) {
  switch (v) {
    case MapVariant::Forward:
    case MapVariant::Bonus:
      return base;
    case MapVariant::Reverse:
      return reverse_map(base);
    case MapVariant::ForwardMirrored:
      return mirror_map(base);
    case MapVariant::ReverseMirrored:
      return mirror_map(reverse_map(base));
  }
  throw std::invalid_argument("unknown map variant");
}

std::string_view to_string(Instrument i) { return i == Instrument::SUS ? "SUS" : "TLX"; }

Instrument parse_instrument(std::string_view s) {
  if (s == "SUS" || s == "sus") return Instrument::SUS;
  if (s == "TLX" || s == "tlx") return Instrument::TLX;
  throw std::invalid_argument("unknown instrument: " + std::string(s));
}

ExperimentSession::ExperimentSession(ExperimentPlan plan, OccupancyGrid base_map, TrialConfig cfg,
                                     EventLog* log)
    : plan_(std::move(plan)), base_map_(std::move(base_map)), cfg_(std::move(cfg)), log_(log) {
  validate_plan(plan_);
  cfg_.validate();
}

TrialSession& ExperimentSession::start_next_trial() {
  if (current_ && !current_->finished()) {
    throw TrialIncomplete("the current trial has not finished");
  }
  if (current_ && results_.size() < next_trial_) conclude_trial();
  if (next_trial_ >= plan_.trials.size()) throw std::out_of_range("every planned trial has run");
  const TrialSpec& spec = plan_.trials[next_trial_];
  current_ = std::make_unique<TrialSession>(
      map_for_variant(base_map_, spec.map_variant), spec, cfg_,
      trial_seed(plan_.rng_seed, next_trial_), log_,
      TrialIdentity{plan_.participant_id, plan_.order, next_trial_});
  ++next_trial_;
  return *current_;
}

const TrialResult& ExperimentSession::conclude_trial() {
  if (!current_) throw TrialIncomplete("no trial has started");
  if (!current_->finished()) throw TrialIncomplete("the current trial has not finished");
  if (results_.size() < next_trial_) results_.push_back(current_->result());
  return results_.back();
}

bool ExperimentSession::plan_complete() const { return results_.size() == plan_.trials.size(); }

double ExperimentSession::submit_questionnaire(std::size_t trial_index, Instrument instrument,
                                               const std::vector<int>& items) {
  if (trial_index >= plan_.trials.size()) {
    throw std::out_of_range(fmt::format("no trial {} in the plan", trial_index));
  }
  if (trial_index >= results_.size()) {
    throw TrialIncomplete(fmt::format("trial {} has not been completed", trial_index));
  }
  for (const auto& q : questionnaires_) {
    if (q.trial_index == trial_index && q.instrument == instrument) {
      throw DuplicateSubmission(
          fmt::format("{} already submitted for trial {}", to_string(instrument), trial_index));
    }
  }
  const double score = instrument == Instrument::SUS ? sus_score(items) : tlx_raw(items);
  questionnaires_.push_back({trial_index, instrument, items, score});
  return score;
}

namespace {

std::string num(double v) { return fmt::format("{}", v); }

}  // namespace

std::string results_csv_header() {
  return "participant,order,control,delay,completion_time,distance,mean_rt,errors,"
         "usage_direct_pct,usage_waypoint_pct\n";
}

std::string results_csv_rows(const ExperimentPlan& plan, const std::vector<TrialResult>& results) {
  std::string out;
  for (std::size_t i = 0; i < results.size() && i < plan.trials.size(); ++i) {
    const TrialResult& r = results[i];
    if (!r.completed) continue;
    const TrialSpec& s = plan.trials[i];
    const auto rt = r.mean_response_time();
    const auto direct = r.usage_percent(ControlMethod::Direct);
    const auto waypoint = r.usage_percent(ControlMethod::Waypoint);
    out += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", plan.participant_id,
                       to_string(plan.order), to_string(s.control), num(s.delay),
                       num(r.completion_time), num(r.distance_travelled), rt ? num(*rt) : "",
                       r.errors_count, direct ? num(*direct) : "", waypoint ? num(*waypoint) : "");
  }
  return out;
}

std::string results_csv(const ExperimentPlan& plan, const std::vector<TrialResult>& results) {
  return results_csv_header() + results_csv_rows(plan, results);
}

std::string questionnaire_csv_header() {
  std::string h = "participant,trial,control,delay,instrument,score";
  for (std::size_t i = 1; i <= kSusItems; ++i) h += fmt::format(",item{}", i);
  return h + "\n";
}

std::string questionnaire_csv_rows(const ExperimentPlan& plan,
                                   const std::vector<QuestionnaireEntry>& entries) {
  std::string out;
  for (const auto& q : entries) {
    const TrialSpec& s = plan.trials.at(q.trial_index);
    out += fmt::format("{},{},{},{},{},{}", plan.participant_id, q.trial_index,
                       to_string(s.control), num(s.delay), to_string(q.instrument), num(q.score));
    for (std::size_t i = 0; i < kSusItems; ++i) {
      out += ",";
      if (i < q.items.size()) out += std::to_string(q.items[i]);
    }
    out += "\n";
  }
  return out;
}

namespace {

OccupancyGrid map_from_json(const json& j) {
  const OccupancyGrid cells = load_map(j.at("text").get<std::string>());
  const auto& s = j.at("start");
  const auto& g = j.at("goal");
  return OccupancyGrid(cells.width(), cells.height(), cells.resolution(), cells.cells(),
                       Pose2D{s.at(0).get<double>(), s.at(1).get<double>(), s.at(2).get<double>()},
                       Point2D{g.at(0).get<double>(), g.at(1).get<double>()},
                       j.at("goal_radius").get<double>(), j.at("midline_x").get<double>());
}

bool same_record(const LogRecord& a, const LogRecord& b) {
  return a.t == b.t && a.kind == b.kind && a.data == b.data;
}

}  // namespace

std::vector<ReplayedTrial> replay(const EventLog& log) {
  const auto& records = log.records();
  std::vector<ReplayedTrial> out;
  std::size_t i = 0;
  while (i < records.size()) {
    if (records[i].kind != log_kind::kTrialStart) {
      throw ReplayMismatch(fmt::format("record {} is '{}', expected a trial start", i,
                                       records[i].kind));
    }
    std::size_t end = i + 1;
    while (end < records.size() && records[end].kind != log_kind::kTrialStart) ++end;

    const json& start = records[i].data;
    ReplayedTrial rt;
    rt.spec = trial_spec_from_json(start.at("spec"));
    rt.trial_index = start.at("index").get<std::size_t>();
    rt.participant_id = start.at("participant").get<std::string>();
    rt.order = parse_order(start.at("order").get<std::string>());

    EventLog regenerated;
    TrialSession session(map_from_json(start.at("map")), rt.spec,
                         trial_config_from_json(start.at("config")),
                         start.at("seed").get<std::uint64_t>(), &regenerated,
                         {rt.participant_id, rt.order, rt.trial_index});
    for (std::size_t k = i + 1; k < end; ++k) {
      const LogRecord& r = records[k];
      if (r.kind == log_kind::kCommand) {
        session.advance_to(r.t);
        if (session.now() != r.t) {
          throw ReplayMismatch(fmt::format("command at {} ns is off the tick grid", r.t.count()));
        }
        session.receive(command_from_json(r.data));
      } else if (r.kind == log_kind::kTrialEnd) {
        while (!session.finished() && session.now() < r.t) session.tick();
        if (!session.finished() && r.data.value("phase", "") == "aborted" && session.now() == r.t) {
          session.abort();
        }
      }
    }
    if (!session.finished()) session.advance_to(records[end - 1].t);

    const auto& got = regenerated.records();
    const std::size_t expected = end - i;
    for (std::size_t k = 0; k < std::max(expected, got.size()); ++k) {
      if (k >= expected || k >= got.size() || !same_record(got[k], records[i + k])) {
        throw ReplayMismatch(fmt::format(
            "trial {} diverges at record {}: replay {} vs log {}", rt.trial_index, k,
            k < got.size() ? EventLog::encode(got[k]) : "<none>",
            k < expected ? EventLog::encode(records[i + k]) : "<none>"));
      }
    }
    rt.result = session.result();
    rt.final_hash = session.state_hash();
    rt.final_state = session.robot();
    out.push_back(std::move(rt));
    i = end;
  }
  return out;
}

}  // namespace telewaypoint
