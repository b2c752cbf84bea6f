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

#include "telewaypoint/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>

namespace telewaypoint {

Costmap::Costmap(int width, int height, double resolution, std::vector<CostCell> cells)
    : width_(width), height_(height), resolution_(resolution), cells_(std::move(cells)) {
  if (width_ <= 0 || height_ <= 0 || !(resolution_ > 0.0) ||
      cells_.size() != static_cast<std::size_t>(width_) * height_) {
    throw std::invalid_argument("malformed costmap");
  }
}

CellIndex Costmap::cell_of(Point2D p) const {
  return {static_cast<int>(std::floor(p.x / resolution_)),
          static_cast<int>(std::floor(p.y / resolution_))};
}

Point2D Costmap::center_of(CellIndex c) const {
  return {(c.x + 0.5) * resolution_, (c.y + 0.5) * resolution_};
}

Costmap inflate(const OccupancyGrid& grid, double radius) {
  if (radius < 0.0) throw std::invalid_argument("inflation radius must be >= 0");
  const int w = grid.width();
  const int h = grid.height();
  std::vector<CostCell> cells(grid.cells().size(), CostCell::Free);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (grid.cells()[i] == Cell::Occupied) cells[i] = CostCell::Occupied;
  }

  const double r_cells = radius / grid.resolution();
  const double r2 = r_cells * r_cells + 1e-9;
  const int reach = static_cast<int>(std::floor(r_cells));
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (grid.cells()[static_cast<std::size_t>(y) * w + x] != Cell::Occupied) continue;
      for (int dy = -reach; dy <= reach; ++dy) {
        for (int dx = -reach; dx <= reach; ++dx) {
          if (dx * dx + dy * dy > r2) continue;
          const int nx = x + dx;
          const int ny = y + dy;
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          CostCell& c = cells[static_cast<std::size_t>(ny) * w + nx];
          if (c == CostCell::Free) c = CostCell::Inflated;
        }
      }
    }
  }
  return Costmap(w, h, grid.resolution(), std::move(cells));
}

double GridRoute::cost() const {
  return straight_moves + diagonal_moves * std::numbers::sqrt2;
}

namespace {

struct OpenEntry {
  double f;
  int y;
  int x;
};

// Orders the heap so the smallest (f, y, x) is on top.
struct OpenAfter {
  bool operator()(const OpenEntry& a, const OpenEntry& b) const {
    if (a.f != b.f) return a.f > b.f;
    if (a.y != b.y) return a.y > b.y;
    return a.x > b.x;
  }
};

constexpr int kDx[8] = {1, -1, 0, 0, 1, 1, -1, -1};
constexpr int kDy[8] = {0, 0, 1, -1, 1, -1, 1, -1};

}  // namespace

GridRoute search(const Costmap& costmap, CellIndex start, CellIndex goal) {
  if (costmap.at(start) == CostCell::Occupied) {
    throw StartBlocked("start cell is occupied");
  }
  if (!costmap.traversable(goal)) throw GoalBlocked("goal cell is not free");

  const int w = costmap.width();
  const auto idx = [w](int x, int y) { return static_cast<std::size_t>(y) * w + x; };
  const std::size_t n = static_cast<std::size_t>(w) * costmap.height();
  std::vector<double> g(n, std::numeric_limits<double>::infinity());
  std::vector<std::int64_t> parent(n, -1);
  std::vector<bool> closed(n, false);

  const auto heuristic = [&](int x, int y) {
    return std::hypot(static_cast<double>(x - goal.x), static_cast<double>(y - goal.y));
  };

  std::priority_queue<OpenEntry, std::vector<OpenEntry>, OpenAfter> open;
  g[idx(start.x, start.y)] = 0.0;
  open.push({heuristic(start.x, start.y), start.y, start.x});

  bool found = false;
  while (!open.empty()) {
    const OpenEntry top = open.top();
    open.pop();
    const std::size_t cur = idx(top.x, top.y);
    if (closed[cur]) continue;
    closed[cur] = true;
    if (top.x == goal.x && top.y == goal.y) {
      found = true;
      break;
    }
    for (int k = 0; k < 8; ++k) {
      const CellIndex nb{top.x + kDx[k], top.y + kDy[k]};
      if (!costmap.traversable(nb)) continue;
      const bool diagonal = kDx[k] != 0 && kDy[k] != 0;
      if (diagonal && (!costmap.traversable({top.x + kDx[k], top.y}) ||
                       !costmap.traversable({top.x, top.y + kDy[k]}))) {
        continue;
      }
      const std::size_t ni = idx(nb.x, nb.y);
      if (closed[ni]) continue;
      const double cand = g[cur] + (diagonal ? std::numbers::sqrt2 : 1.0);
      if (cand < g[ni]) {
        g[ni] = cand;
        parent[ni] = static_cast<std::int64_t>(cur);
        open.push({cand + heuristic(nb.x, nb.y), nb.y, nb.x});
      }
    }
  }
  if (!found) throw GoalUnreachable("no traversable route to goal");

  GridRoute route;
  for (std::int64_t at = static_cast<std::int64_t>(idx(goal.x, goal.y)); at >= 0;
       at = parent[static_cast<std::size_t>(at)]) {
    route.cells.push_back({static_cast<int>(at % w), static_cast<int>(at / w)});
  }
  std::reverse(route.cells.begin(), route.cells.end());
  for (std::size_t i = 1; i < route.cells.size(); ++i) {
    const bool diagonal = route.cells[i].x != route.cells[i - 1].x &&
                          route.cells[i].y != route.cells[i - 1].y;
    (diagonal ? route.diagonal_moves : route.straight_moves) += 1;
  }
  return route;
}

bool line_of_sight(const Costmap& costmap, Point2D a, Point2D b) {
  const double res = costmap.resolution();
  double ax = a.x / res, ay = a.y / res, bx = b.x / res, by = b.y / res;
  if (ax > bx) {
    std::swap(ax, bx);
    std::swap(ay, by);
  }
  // Columns whose closed x-extent meets [ax, bx].
  const int c0 = static_cast<int>(std::ceil(ax)) - 1;
  const int c1 = static_cast<int>(std::floor(bx));
  for (int c = c0; c <= c1; ++c) {
    double ylo;
    double yhi;
    if (bx == ax) {
      ylo = std::min(ay, by);
      yhi = std::max(ay, by);
    } else {
      const double xl = std::max(ax, static_cast<double>(c));
      const double xr = std::min(bx, static_cast<double>(c + 1));
      const double slope = (by - ay) / (bx - ax);
      const double y_l = ay + slope * (xl - ax);
      const double y_r = ay + slope * (xr - ax);
      ylo = std::min(y_l, y_r);
      yhi = std::max(y_l, y_r);
    }
    const int r0 = static_cast<int>(std::ceil(ylo)) - 1;
    const int r1 = static_cast<int>(std::floor(yhi));
    for (int r = r0; r <= r1; ++r) {
      if (!costmap.traversable({c, r})) return false;
    }
  }
  return true;
}

double polyline_length(const std::vector<Point2D>& points) {
  double total = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    total += distance(points[i - 1], points[i]);
  }
  return total;
}

Path plan(const Costmap& costmap, Point2D start, Point2D goal) {
  const CellIndex s = costmap.cell_of(start);
  const CellIndex t = costmap.cell_of(goal);
  Path path;
  path.route = search(costmap, s, t);
  if (s == t) {
    path.waypoints = {goal};
    path.total_length = 0.0;
    return path;
  }

  const auto& cells = path.route.cells;
  std::vector<Point2D> pts;
  pts.reserve(cells.size());
  pts.push_back(start);
  for (std::size_t i = 1; i + 1 < cells.size(); ++i) pts.push_back(costmap.center_of(cells[i]));
  pts.push_back(goal);

  path.waypoints.push_back(pts.front());
  std::size_t i = 0;
  while (i + 1 < pts.size()) {
    std::size_t next = i + 1;
    for (std::size_t j = pts.size() - 1; j > i + 1; --j) {
      if (line_of_sight(costmap, pts[i], pts[j])) {
        next = j;
        break;
      }
    }
    path.waypoints.push_back(pts[next]);
    i = next;
  }
  path.total_length = polyline_length(path.waypoints);
  return path;
}

FollowOutput follow(const Path& path, const RobotState& state, const SimConfig& sim,
                    const PursuitConfig& cfg) {
  if (path.waypoints.empty()) throw std::invalid_argument("follow: empty path");
  const Point2D p = state.pose.position();
  const auto& wp = path.waypoints;
  if (distance(p, wp.back()) <= cfg.arrive_tolerance) return {{0.0, 0.0}, true};

  // Closest point on the polyline; later segments win ties.
  std::size_t seg = 0;
  Point2D proj = wp.front();
  double best = distance(p, proj);
  for (std::size_t i = 0; i + 1 < wp.size(); ++i) {
    const Point2D ab = wp[i + 1] - wp[i];
    const double len2 = dot(ab, ab);
    double t = len2 > 0.0 ? dot(p - wp[i], ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const Point2D q = wp[i] + t * ab;
    const double d = distance(p, q);
    if (d <= best) {
      best = d;
      seg = i;
      proj = q;
    }
  }

  // Walk forward from the projection to the first point >= lookahead away.
  Point2D target = wp.back();
  Point2D from = proj;
  bool found = distance(p, proj) >= cfg.lookahead;
  if (found) target = proj;
  for (std::size_t i = seg; !found && i + 1 < wp.size(); ++i) {
    const Point2D to = wp[i + 1];
    if (distance(p, to) >= cfg.lookahead) {
      // Smallest t in [0, 1] with |from + t (to - from) - p| = lookahead.
      const Point2D d = to - from;
      const Point2D f = from - p;
      const double a = dot(d, d);
      const double b = 2.0 * dot(f, d);
      const double c = dot(f, f) - cfg.lookahead * cfg.lookahead;
      double t = 1.0;
      if (a > 0.0) {
        const double disc = std::max(0.0, b * b - 4.0 * a * c);
        t = std::clamp((-b + std::sqrt(disc)) / (2.0 * a), 0.0, 1.0);
      }
      target = from + t * d;
      found = true;
      break;
    }
    from = to;
  }

  const double err = normalize_angle(heading_toward(p, target) - state.pose.theta);
  const double abs_err = std::abs(err);
  constexpr double kQuarter = std::numbers::pi / 4.0;
  constexpr double kHalf = std::numbers::pi / 2.0;
  double v = sim.v_max;
  if (abs_err > kHalf) {
    v = 0.0;
  } else if (abs_err > kQuarter) {
    v = sim.v_max * (kHalf - abs_err) / kQuarter;
  }
  const double w = std::clamp(cfg.gain * err, -sim.omega_max, sim.omega_max);
  return {{v, w}, false};
}

}  // namespace telewaypoint
