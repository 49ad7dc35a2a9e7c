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

#ifndef TRAJPROP_CURVE_HPP_
#define TRAJPROP_CURVE_HPP_

#include <array>
#include <span>
#include <vector>

#include "trajprop/types.hpp"

namespace trajprop::curve
{

/// A planar trajectory as a pair of cubic polynomials x(u), y(u) over
/// normalized time u = (t - t_start) / (t_end - t_start) in [0, 1].
/// Fitting against normalized time keeps the normal equations
/// well-conditioned regardless of the absolute time scale.
struct CubicCurve
{
  std::array<double, 4> coeffs_x{};  // a0..a3 of x(u)
  std::array<double, 4> coeffs_y{};
  double t_start{0.0};
  double t_end{1.0};

  double to_u(double t) const { return (t - t_start) / (t_end - t_start); }
  Vec2 eval(double t) const;
};

/// The control-point parameterization of a candidate future: the last
/// observed point, a hypothesized end point at t_end, and the signed lateral
/// offset gamma of the curvature control point. Positive gamma lies on the
/// left of the chord from current_point to end_point.
struct ControlGeometry
{
  TimedPoint current_point;
  Vec2 end_point;
  double t_end{0.0};
  double gamma{0.0};
};

inline constexpr double kDegenerateChord = 1e-9;  // meters

/// Least-squares cubic through >= 4 points with strictly increasing, finite
/// timestamps. With exactly 4 points the fit interpolates. The returned
/// t_span is [first t, last t].
CubicCurve fit_cubic(std::span<const TimedPoint> points);

/// Evaluates the curve at the given ascending times, all within t_span
/// (inclusive). Output length equals input length.
std::vector<TimedPoint> sample_curve(const CubicCurve & curve, std::span<const double> times);

/// The curvature control point: chord midpoint offset by gamma along the
/// chord's left normal, stamped with t_mid = (t_current + t_end) / 2.
/// Throws on a degenerate chord (current == end within 1e-9 m).
TimedPoint curvature_point(const ControlGeometry & geom);

/// Fits a cubic through history + curvature point + end point, t_span
/// [first history t, t_end]. For a degenerate chord (stationary agent) the
/// curvature point is skipped and the fit runs through history + end point.
CubicCurve fit_from_controls(const Trajectory & history, const ControlGeometry & geom);

/// Signed lateral offset of the curve from the chord midpoint, measured at
/// t_mid along the chord's left normal. Inverse of the curvature_point
/// construction (up to least-squares attenuation).
double gamma_of(const CubicCurve & c, const TimedPoint & current_point, const TimedPoint & end_point);

}  // namespace trajprop::curve

#endif  // TRAJPROP_CURVE_HPP_
