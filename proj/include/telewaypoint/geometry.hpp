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

#pragma once

#include <cmath>
#include <numbers>

namespace telewaypoint {

struct Point2D {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2D&, const Point2D&) = default;
};

inline Point2D operator+(Point2D a, Point2D b) { return {a.x + b.x, a.y + b.y}; }
inline Point2D operator-(Point2D a, Point2D b) { return {a.x - b.x, a.y - b.y}; }
inline Point2D operator*(double s, Point2D p) { return {s * p.x, s * p.y}; }

inline double dot(Point2D a, Point2D b) { return a.x * b.x + a.y * b.y; }
inline double norm(Point2D p) { return std::hypot(p.x, p.y); }
inline double distance(Point2D a, Point2D b) { return norm(a - b); }

// Wraps an angle into (-pi, pi].
inline double normalize_angle(double radians) {
  double a = std::remainder(radians, 2.0 * std::numbers::pi);
  if (a <= -std::numbers::pi) a += 2.0 * std::numbers::pi;
  return a;
}

struct Pose2D {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  Point2D position() const { return {x, y}; }

  friend bool operator==(const Pose2D&, const Pose2D&) = default;
};

// Closest distance between point p and segment [a, b].
inline double point_segment_distance(Point2D p, Point2D a, Point2D b) {
  const Point2D ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 == 0.0) return distance(p, a);
  double t = dot(p - a, ab) / len2;
  t = t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t);
  return distance(p, a + t * ab);
}

}  // namespace telewaypoint
