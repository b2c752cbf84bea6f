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

#include "telewaypoint/wire.hpp"

namespace telewaypoint {

using nlohmann::json;

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

json vec3(const Vec3& v) { return json::array({v.x, v.y, v.z}); }
json point(const Point2D& p) { return json::array({p.x, p.y}); }
json opt_point(const std::optional<Point2D>& p) { return p ? point(*p) : json(nullptr); }

Vec3 read_vec3(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_array() || j[key].size() != 3) {
    throw WireFormatError(std::string("expected 3-vector '") + key + "'");
  }
  const auto& a = j[key];
  for (const auto& e : a) {
    if (!e.is_number()) throw WireFormatError(std::string("non-numeric '") + key + "'");
  }
  return {a[0].get<double>(), a[1].get<double>(), a[2].get<double>()};
}

double read_number(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number()) {
    throw WireFormatError(std::string("expected number '") + key + "'");
  }
  return j[key].get<double>();
}

std::string read_string(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_string()) {
    throw WireFormatError(std::string("expected string '") + key + "'");
  }
  return j[key].get<std::string>();
}

}  // namespace

std::string_view command_kind(const WireCommand& c) {
  return std::visit(Overloaded{
                        [](const cmd::Drive&) { return std::string_view("drive"); },
                        [](const cmd::AimBegin&) { return std::string_view("aim_begin"); },
                        [](const cmd::AimUpdate&) { return std::string_view("aim_update"); },
                        [](const cmd::AimRelease&) { return std::string_view("aim_release"); },
                        [](const cmd::Confirm&) { return std::string_view("confirm"); },
                        [](const cmd::StopGrip&) { return std::string_view("stop_grip"); },
                        [](const cmd::SwitchMethod&) {
                          return std::string_view("switch_method");
                        },
                        [](const cmd::StimulusResponse&) {
                          return std::string_view("stimulus_response");
                        },
                    },
                    c);
}

json to_json(const WireCommand& c) {
  json j;
  j["kind"] = command_kind(c);
  std::visit(Overloaded{
                 [&](const cmd::Drive& d) {
                   j["y"] = d.input.y_axis;
                   j["x"] = d.input.x_axis;
                 },
                 [&](const cmd::AimUpdate& a) {
                   j["position"] = vec3(a.pose.position);
                   j["forward"] = vec3(a.pose.forward);
                 },
                 [&](const cmd::SwitchMethod& s) { j["method"] = to_string(s.to); },
                 [&](const cmd::StimulusResponse& r) {
                   j["button"] = to_string(r.button);
                   if (r.stimulus_id) j["stimulus"] = *r.stimulus_id;
                 },
                 [](const auto&) {},
             },
             c);
  return j;
}

WireCommand command_from_json(const json& j) {
  if (!j.is_object()) throw WireFormatError("command must be an object");
  const std::string kind = read_string(j, "kind");
  try {
    if (kind == "drive") {
      const double y = read_number(j, "y");
      const double x = read_number(j, "x");
      return cmd::Drive{DriveInput::clamped(y, x)};
    }
    if (kind == "aim_begin") return cmd::AimBegin{};
    if (kind == "aim_update") {
      ControllerPose pose{read_vec3(j, "position"), read_vec3(j, "forward")};
      pose.validate();
      return cmd::AimUpdate{pose};
    }
    if (kind == "aim_release") return cmd::AimRelease{};
    if (kind == "confirm") return cmd::Confirm{};
    if (kind == "stop_grip") return cmd::StopGrip{};
    if (kind == "switch_method") {
      const ControlMethod m = parse_method(read_string(j, "method"));
      if (m == ControlMethod::Switchable) throw WireFormatError("cannot switch to 'switchable'");
      return cmd::SwitchMethod{m};
    }
    if (kind == "stimulus_response") {
      cmd::StimulusResponse r{parse_arrow(read_string(j, "button")), std::nullopt};
      if (j.contains("stimulus")) {
        if (!j["stimulus"].is_number_integer()) throw WireFormatError("stimulus id must be an integer");
        r.stimulus_id = j["stimulus"].get<int>();
      }
      return r;
    }
  } catch (const std::invalid_argument& e) {
    throw WireFormatError(e.what());
  }
  throw WireFormatError("unknown command kind: " + kind);
}

std::string encode_command(const WireCommand& c) { return to_json(c).dump(); }

WireCommand decode_command(std::string_view line) {
  json j = json::parse(line.begin(), line.end(), nullptr, false);
  if (j.is_discarded()) throw WireFormatError("command is not valid JSON");
  return command_from_json(j);
}

std::string_view to_string(TrialPhase p) {
  switch (p) {
    case TrialPhase::Running:
      return "running";
    case TrialPhase::Complete:
      return "complete";
    case TrialPhase::Aborted:
      return "aborted";
  }
  return "unknown";
}

json to_json(const StateFrame& f) {
  json j;
  j["tick"] = f.tick;
  j["t"] = f.time;
  j["pose"] = json::array({f.robot.pose.x, f.robot.pose.y, f.robot.pose.theta});
  j["linear_vel"] = f.robot.linear_vel;
  j["angular_vel"] = f.robot.angular_vel;
  j["proximity_warning"] = f.proximity_warning;
  j["method"] = to_string(f.active_method);
  j["selection"] = {
      {"mode", to_string(f.selection_mode)},
      {"reticle", opt_point(f.reticle)},
      {"prospective", opt_point(f.prospective_target)},
      {"confirmed", opt_point(f.confirmed_target)},
  };
  j["navigating"] = f.navigating;
  json path = json::array();
  for (const auto& p : f.path) path.push_back(point(p));
  j["path"] = std::move(path);
  json stim = json::array();
  for (const auto& s : f.active_stimuli) {
    stim.push_back({{"id", s.id}, {"direction", to_string(s.direction)}, {"spawn_time", s.spawn_time}});
  }
  j["stimuli"] = std::move(stim);
  json acks = json::array();
  for (const auto& a : f.acks) {
    acks.push_back({{"stimulus", a.stimulus_id}, {"correct", a.correct}, {"rt", a.response_time}});
  }
  j["acks"] = std::move(acks);
  j["phase"] = to_string(f.phase);
  j["delay_onset"] = f.delay_onset;
  j["delay_active"] = f.delay_active;
  j["notices"] = f.notices;
  j["questionnaires_due"] = f.questionnaires_due;
  return j;
}

std::string encode_frame(const StateFrame& f) { return to_json(f).dump(); }

}  // namespace telewaypoint
