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

#include "telewaypoint/grid.hpp"

#include <charconv>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

namespace telewaypoint {

OccupancyGrid::OccupancyGrid(int width_cells, int height_cells, double resolution,
                             std::vector<Cell> cells, Pose2D start_pose,
                             Point2D goal_center, double goal_radius,
                             double midline_x)
    : width_(width_cells),
      height_(height_cells),
      resolution_(resolution),
      cells_(std::move(cells)),
      start_(start_pose),
      goal_(goal_center),
      goal_radius_(goal_radius),
      midline_x_(midline_x) {
  if (width_ <= 0 || height_ <= 0) {
    throw std::invalid_argument("grid dimensions must be positive");
  }
  if (!(resolution_ > 0.0)) {
    throw std::invalid_argument("grid resolution must be positive");
  }
  if (cells_.size() != static_cast<std::size_t>(width_) * height_) {
    throw std::invalid_argument("cell count does not match dimensions");
  }
  if (!(goal_radius_ > 0.0)) {
    throw std::invalid_argument("goal radius must be positive");
  }
  if (occupied(cell_of(start_.position()))) {
    throw std::invalid_argument("start pose is not on a free cell");
  }
  if (occupied(cell_of(goal_))) {
    throw std::invalid_argument("goal is not on a free cell");
  }
  start_.theta = normalize_angle(start_.theta);
}

CellIndex OccupancyGrid::cell_of(Point2D p) const {
  return {static_cast<int>(std::floor(p.x / resolution_)),
          static_cast<int>(std::floor(p.y / resolution_))};
}

Point2D OccupancyGrid::center_of(CellIndex c) const {
  return {(c.x + 0.5) * resolution_, (c.y + 0.5) * resolution_};
}

double heading_toward(Point2D from, Point2D to) {
  const Point2D d = to - from;
  if (d.x == 0.0 && d.y == 0.0) return 0.0;
  return normalize_angle(std::atan2(d.y, d.x));
}

namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) {
      lines.push_back(text.substr(pos));
      break;
    }
    lines.push_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  return lines;
}

double parse_resolution(std::string_view header) {
  std::string_view value = header.substr(4);
  double res = 0.0;
  const auto [ptr, ec] =
      std::from_chars(value.data(), value.data() + value.size(), res);
  if (ec != std::errc{} || ptr != value.data() + value.size() || !(res > 0.0) ||
      !std::isfinite(res)) {
    throw MalformedMap("bad resolution header: " + std::string(header));
  }
  return res;
}

}  // namespace

OccupancyGrid load_map(std::string_view text) {
  auto lines = split_lines(text);
  double res = kDefaultResolution;
  if (!lines.empty() && lines.front().starts_with("res=")) {
    res = parse_resolution(lines.front());
    lines.erase(lines.begin());
  }
  if (lines.empty()) throw MalformedMap("map has no rows");

  const int height = static_cast<int>(lines.size());
  const int width = static_cast<int>(lines.front().size());
  if (width == 0) throw MalformedMap("map rows are empty");

  std::vector<Cell> cells(static_cast<std::size_t>(width) * height, Cell::Free);
  std::optional<CellIndex> start;
  std::optional<CellIndex> goal;
  std::optional<int> midline_col;

  for (int row = 0; row < height; ++row) {
    const std::string_view line = lines[row];
    if (static_cast<int>(line.size()) != width) {
      throw MalformedMap("ragged row " + std::to_string(row + 1) + ": expected " +
                         std::to_string(width) + " columns, got " +
                         std::to_string(line.size()));
    }
    const int y = height - 1 - row;
    for (int x = 0; x < width; ++x) {
      Cell& cell = cells[static_cast<std::size_t>(y) * width + x];
      switch (line[x]) {
        case '#':
          cell = Cell::Occupied;
          break;
        case '.':
          break;
        case 'S':
          if (start) throw MalformedMap("duplicate start 'S'");
          start = CellIndex{x, y};
          break;
        case 'T':
          if (goal) throw MalformedMap("duplicate goal 'T'");
          goal = CellIndex{x, y};
          break;
        case '|':
          if (midline_col && *midline_col != x) {
            throw MalformedMap("midline markers span more than one column");
          }
          midline_col = x;
          break;
        default:
          throw MalformedMap("illegal character '" + std::string(1, line[x]) +
                             "' at row " + std::to_string(row + 1));
      }
    }
  }
  if (!start) throw MalformedMap("missing start 'S'");
  if (!goal) throw MalformedMap("missing goal 'T'");

  const Point2D start_pt{(start->x + 0.5) * res, (start->y + 0.5) * res};
  const Point2D goal_pt{(goal->x + 0.5) * res, (goal->y + 0.5) * res};
  const double midline =
      midline_col ? (*midline_col + 0.5) * res : 0.5 * width * res;
  try {
    return OccupancyGrid(width, height, res, std::move(cells),
                         {start_pt.x, start_pt.y, heading_toward(start_pt, goal_pt)},
                         goal_pt, kDefaultGoalRadius, midline);
  } catch (const std::invalid_argument& e) {
    throw MalformedMap(e.what());
  }
}

OccupancyGrid load_map_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open map file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_map(ss.str());
}

std::string format_map(const OccupancyGrid& grid) {
  const double res = grid.resolution();
  const CellIndex s = grid.cell_of(grid.start_pose().position());
  const CellIndex t = grid.cell_of(grid.goal_center());
  std::optional<int> midline_col;
  const double col = grid.midline_x() / res - 0.5;
  if (std::abs(col - std::round(col)) < 1e-9) {
    midline_col = static_cast<int>(std::round(col));
  }

  std::ostringstream out;
  char header[64];
  std::snprintf(header, sizeof header, "res=%.17g\n", res);
  out << header;
  for (int y = grid.height() - 1; y >= 0; --y) {
    for (int x = 0; x < grid.width(); ++x) {
      const CellIndex c{x, y};
      char ch = grid.occupied(c) ? '#' : '.';
      if (c == s) {
        ch = 'S';
      } else if (c == t) {
        ch = 'T';
      } else if (ch == '.' && midline_col && *midline_col == x) {
        ch = '|';
      }
      out << ch;
    }
    out << '\n';
  }
  return out.str();
}

OccupancyGrid mirror_map(const OccupancyGrid& grid) {
  const int w = grid.width();
  std::vector<Cell> cells(grid.cells().size());
  for (int y = 0; y < grid.height(); ++y) {
    for (int x = 0; x < w; ++x) {
      cells[static_cast<std::size_t>(y) * w + (w - 1 - x)] =
          grid.cells()[static_cast<std::size_t>(y) * w + x];
    }
  }
  const double width_m = grid.width_m();
  const Pose2D s = grid.start_pose();
  const Point2D start{width_m - s.x, s.y};
  const Point2D goal{width_m - grid.goal_center().x, grid.goal_center().y};
  return OccupancyGrid(w, grid.height(), grid.resolution(), std::move(cells),
                       {start.x, start.y, heading_toward(start, goal)}, goal,
                       grid.goal_radius(), width_m - grid.midline_x());
}

OccupancyGrid reverse_map(const OccupancyGrid& grid) {
  const Point2D start = grid.goal_center();
  const Point2D goal = grid.start_pose().position();
  return OccupancyGrid(grid.width(), grid.height(), grid.resolution(),
                       grid.cells(), {start.x, start.y, heading_toward(start, goal)},
                       goal, grid.goal_radius(), grid.midline_x());
}

}  // namespace telewaypoint
