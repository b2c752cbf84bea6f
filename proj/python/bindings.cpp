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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "telewaypoint/bots.hpp"
#include "telewaypoint/planner.hpp"
#include "telewaypoint/selection.hpp"
#include "telewaypoint/session.hpp"
#include "telewaypoint/stats.hpp"
#include "telewaypoint/wire.hpp"

namespace py = pybind11;
using namespace telewaypoint;

namespace {

py::object to_py(const nlohmann::json& j) {
  switch (j.type()) {
    case nlohmann::json::value_t::null:
      return py::none();
    case nlohmann::json::value_t::boolean:
      return py::bool_(j.get<bool>());
    case nlohmann::json::value_t::number_integer:
      return py::int_(j.get<std::int64_t>());
    case nlohmann::json::value_t::number_unsigned:
      return py::int_(j.get<std::uint64_t>());
    case nlohmann::json::value_t::number_float:
      return py::float_(j.get<double>());
    case nlohmann::json::value_t::string:
      return py::str(j.get<std::string>());
    case nlohmann::json::value_t::array: {
      py::list out;
      for (const auto& e : j) out.append(to_py(e));
      return out;
    }
    default: {
      py::dict out;
      for (const auto& [k, v] : j.items()) out[py::str(k)] = to_py(v);
      return out;
    }
  }
}

py::tuple point(Point2D p) { return py::make_tuple(p.x, p.y); }

RmDataset dataset_from(const py::iterable& subjects) {
  RmDataset ds;
  for (const auto& item : subjects) {
    const auto d = item.cast<py::dict>();
    Subject s;
    s.id = d.contains("id") ? d["id"].cast<std::string>() : std::to_string(ds.subjects.size());
    s.group = parse_order(d.contains("group") ? d["group"].cast<std::string>() : "DCFirst");
    const auto cells = d["cells"].cast<std::vector<double>>();
    if (cells.size() != 4) throw std::invalid_argument("cells needs four values");
    std::copy(cells.begin(), cells.end(), s.cells.begin());
    ds.subjects.push_back(std::move(s));
  }
  return ds;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Simulation, planning and analysis core.";

  py::register_exception<MalformedMap>(m, "MalformedMap", PyExc_ValueError);
  py::register_exception<PlanningError>(m, "PlanningError", PyExc_RuntimeError);
  py::register_exception<WireFormatError>(m, "WireFormatError", PyExc_ValueError);
  py::register_exception<InsufficientData>(m, "InsufficientData", PyExc_RuntimeError);
  py::register_exception<ReplayMismatch>(m, "ReplayMismatch", PyExc_RuntimeError);

  py::class_<OccupancyGrid>(m, "Map")
      .def_property_readonly("width", &OccupancyGrid::width)
      .def_property_readonly("height", &OccupancyGrid::height)
      .def_property_readonly("resolution", &OccupancyGrid::resolution)
      .def_property_readonly("start",
                             [](const OccupancyGrid& g) {
                               const Pose2D& s = g.start_pose();
                               return py::make_tuple(s.x, s.y, s.theta);
                             })
      .def_property_readonly("goal", [](const OccupancyGrid& g) { return point(g.goal_center()); })
      .def_property_readonly("midline_x", &OccupancyGrid::midline_x)
      .def("occupied", py::overload_cast<int, int>(&OccupancyGrid::occupied, py::const_))
      .def("__str__", &format_map)
      .def("__eq__", [](const OccupancyGrid& a, const OccupancyGrid& b) { return a == b; });

  m.def("load_map", &load_map, py::arg("text"));
  m.def("load_map_file", &load_map_file, py::arg("path"));
  m.def("mirror_map", &mirror_map);
  m.def("reverse_map", &reverse_map);

  m.def(
      "plan_path",
      [](const OccupancyGrid& map, std::pair<double, double> start, std::pair<double, double> goal,
         double inflation) {
        const Path p = plan(inflate(map, inflation), {start.first, start.second}, {goal.first, goal.second});
        py::list pts;
        for (const auto& w : p.waypoints) pts.append(point(w));
        return py::make_tuple(pts, p.total_length);
      },
      py::arg("map"), py::arg("start"), py::arg("goal"), py::arg("inflation") = TrialConfig{}.inflation_radius,
      "Smoothed path as ([(x, y), ...], length).");

  m.def(
      "arc_landing",
      [](std::array<double, 3> hand, double yaw, double pitch, double launch_speed) -> py::object {
        ArcConfig cfg;
        cfg.launch_speed = launch_speed;
        const auto p = arc_landing(ControllerPose::aimed({hand[0], hand[1], hand[2]}, yaw, pitch), cfg);
        return p ? py::object(point(*p)) : py::none();
      },
      py::arg("hand"), py::arg("yaw"), py::arg("pitch"), py::arg("launch_speed") = ArcConfig{}.launch_speed);

  m.def("sus_score", &sus_score, py::arg("items"));
  m.def("tlx_raw", &tlx_raw, py::arg("scales"));
  m.def("f_cdf", &f_cdf, py::arg("x"), py::arg("d1"), py::arg("d2"));
  m.def("f_sf", &f_sf, py::arg("x"), py::arg("d1"), py::arg("d2"));
  m.def("t_cdf", &t_cdf, py::arg("x"), py::arg("df"));

  m.def(
      "mixed_anova",
      [](const py::iterable& subjects) {
        const AnovaTable t = mixed_anova(dataset_from(subjects));
        py::list rows;
        for (const auto& r : t.rows) {
          py::dict d;
          d["effect"] = std::string(to_string(r.effect));
          d["ss"] = r.ss;
          d["df"] = py::make_tuple(r.df_num, r.df_den);
          d["ss_error"] = r.ss_error;
          d["f"] = r.f;
          d["p"] = r.p;
          rows.append(d);
        }
        return rows;
      },
      py::arg("subjects"),
      "Subjects are dicts with 'group' (DCFirst/WCFirst) and 'cells' "
      "[direct, direct delayed, waypoint, waypoint delayed].");

  m.def(
      "paired_t",
      [](const std::vector<double>& x, const std::vector<double>& y) {
        const TTest t = paired_t(x, y);
        return py::make_tuple(t.t, t.df, t.p);
      },
      py::arg("x"), py::arg("y"));

  m.def(
      "build_plan",
      [](const std::string& participant, const std::string& order, std::uint64_t seed, bool bonus) {
        return to_py(to_json(build_plan(participant, parse_order(order), seed, bonus)));
      },
      py::arg("participant"), py::arg("order"), py::arg("seed") = 0, py::arg("bonus") = false);

  m.def(
      "decode_command", [](const std::string& line) { return to_py(to_json(decode_command(line))); },
      py::arg("line"), "Parses and normalizes one wire command.");

  m.def(
      "run_bot_session",
      [](const OccupancyGrid& map, const std::string& participant, const std::string& order,
         std::uint64_t seed, bool bonus) {
        EventLog log;
        ExperimentSession s(build_plan(participant, parse_order(order), seed, bonus), map, TrialConfig{}, &log);
        {
          py::gil_scoped_release release;
          run_bot_session(s, BotSuite{});
        }
        return py::make_tuple(results_csv(s.plan(), s.results()), log.to_string());
      },
      py::arg("map"), py::arg("participant"), py::arg("order") = "DCFirst", py::arg("seed") = 0,
      py::arg("bonus") = false, "Runs a full bot session; returns (results CSV, event log).");

  m.def(
      "replay_results_csv",
      [](const std::string& log_text) {
        const auto trials = replay(EventLog::parse(log_text));
        if (trials.empty()) throw std::invalid_argument("log holds no trials");
        ExperimentPlan plan;
        plan.participant_id = trials.front().participant_id;
        plan.order = trials.front().order;
        std::vector<TrialResult> results;
        for (const auto& t : trials) {
          plan.trials.push_back(t.spec);
          results.push_back(t.result);
        }
        return results_csv(plan, results);
      },
      py::arg("event_log"), "Replays an event log and rebuilds its results CSV.");

  m.def(
      "delay_experiment",
      [](const OccupancyGrid& map, const std::string& kind, std::size_t runs, std::uint64_t seed) {
        BotConfig cfg{kind == "direct" ? BotKind::Direct : BotKind::Waypoint};
        if (kind != "direct" && kind != "waypoint") throw std::invalid_argument("kind is direct or waypoint");
        DelayExperiment e;
        {
          py::gil_scoped_release release;
          e = run_delay_experiment(map, cfg, TrialConfig{}, runs, seed);
        }
        py::list ratios;
        for (const auto& r : e.runs) ratios.append(r.ratio());
        return py::make_tuple(e.mean_ratio(), ratios);
      },
      py::arg("map"), py::arg("kind"), py::arg("runs") = 20, py::arg("seed") = 2026,
      "Paired undelayed/delayed bot runs; returns (mean ratio, per-seed ratios).");

  m.def(
      "analysis_report",
      [](const std::string& results, const std::string& questionnaires) {
        return analysis_report(
            build_datasets(parse_results_csv(results),
                           questionnaires.empty() ? std::vector<QuestionnaireRow>{}
                                                  : parse_questionnaire_csv(questionnaires)));
      },
      py::arg("results_csv"), py::arg("questionnaires_csv") = "");
}
