// Copyright 2026 The trajprop Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TRAJPROP_TYPES_HPP_
#define TRAJPROP_TYPES_HPP_

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace trajprop
{

/// Error type thrown by every operation in this library on contract
/// violations (bad preconditions, malformed files, shape mismatches).
class Error : public std::runtime_error
{
public:
  explicit Error(const std::string & what) : std::runtime_error(what) {}
};

struct Vec2
{
  double x{0.0};
  double y{0.0};

  Vec2 operator+(const Vec2 & o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2 & o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(const Vec2 & o) const { return x * o.x + y * o.y; }
  /// z component of the 3D cross product; positive when o is to the left.
  double cross(const Vec2 & o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }
  double squared_norm() const { return x * x + y * y; }
  Vec2 normalized() const
  {
    const double n = norm();
    return n > 0.0 ? Vec2{x / n, y / n} : Vec2{0.0, 0.0};
  }
  /// Counter-clockwise 90 degree rotation (the left normal of a direction).
  Vec2 left_normal() const { return {-y, x}; }
  Vec2 rotated(double angle) const
  {
    const double c = std::cos(angle), s = std::sin(angle);
    return {c * x - s * y, s * x + c * y};
  }
};

inline double distance(const Vec2 & a, const Vec2 & b) { return (a - b).norm(); }

/// One observation of an agent: time (seconds, relative to the start of the
/// observation window) and planar position in meters.
struct TimedPoint
{
  double t{0.0};
  double x{0.0};
  double y{0.0};

  Vec2 pos() const { return {x, y}; }
};

/// Observation / prediction window configuration. t_obs and t_pre are the
/// durations of the history and future segments, dt the uniform frame step.
struct Horizon
{
  double t_obs{3.0};
  double t_pre{3.0};
  double dt{0.5};

  int history_points() const { return static_cast<int>(std::lround(t_obs / dt)); }
  int future_points() const { return static_cast<int>(std::lround(t_pre / dt)); }
};

/// A time-stamped 2D point sequence for one agent. Timestamps must be
/// strictly increasing and uniformly spaced (within 1e-9 s).
struct Trajectory
{
  std::vector<TimedPoint> points;
  Horizon horizon;
};

/// Throws Error unless the trajectory has >= 2 points, strictly increasing
/// timestamps, uniform spacing within 1e-9 s, and finite coordinates.
void validate_trajectory(const Trajectory & traj);

inline bool finite(const Vec2 & v) { return std::isfinite(v.x) && std::isfinite(v.y); }

}  // namespace trajprop

#endif  // TRAJPROP_TYPES_HPP_
