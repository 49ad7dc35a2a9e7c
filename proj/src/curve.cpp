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

#include "trajprop/curve.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "trajprop/kernels.hpp"

namespace trajprop
{

void validate_trajectory(const Trajectory & traj)
{
  const auto & pts = traj.points;
  if (pts.size() < 2) {
    throw Error("trajectory needs at least 2 points, got " + std::to_string(pts.size()));
  }
  const double dt = pts[1].t - pts[0].t;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!std::isfinite(pts[i].t) || !std::isfinite(pts[i].x) || !std::isfinite(pts[i].y)) {
      throw Error("trajectory point " + std::to_string(i) + " has non-finite values");
    }
    if (i > 0) {
      const double step = pts[i].t - pts[i - 1].t;
      if (step <= 0.0) {
        throw Error("trajectory timestamps not strictly increasing at index " + std::to_string(i));
      }
      if (std::abs(step - dt) > 1e-9) {
        throw Error("trajectory spacing not uniform at index " + std::to_string(i));
      }
    }
  }
}

}  // namespace trajprop

namespace trajprop::curve
{
namespace
{

// Solves the 4x4 system a * x = b in place with partial pivoting. The
// normal-equations matrix here is symmetric positive definite for any
// non-degenerate input, so the solve cannot hit a zero pivot in practice.
std::array<double, 4> solve4(std::array<std::array<double, 4>, 4> a, std::array<double, 4> b)
{
  for (int col = 0; col < 4; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 4; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) {
        pivot = r;
      }
    }
    if (std::abs(a[pivot][col]) < 1e-300) {
      throw Error("singular system in cubic fit");
    }
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    for (int r = col + 1; r < 4; ++r) {
      const double f = a[r][col] / a[col][col];
      for (int c = col; c < 4; ++c) {
        a[r][c] -= f * a[col][c];
      }
      b[r] -= f * b[col];
    }
  }
  std::array<double, 4> x{};
  for (int r = 3; r >= 0; --r) {
    double acc = b[r];
    for (int c = r + 1; c < 4; ++c) {
      acc -= a[r][c] * x[c];
    }
    x[r] = acc / a[r][r];
  }
  return x;
}

CubicCurve fit_points(std::span<const TimedPoint> points)
{
  const double t0 = points.front().t;
  const double t1 = points.back().t;
  const double span = t1 - t0;

  // Normal equations for x(u) and y(u); both share the moment matrix.
  std::array<std::array<double, 4>, 4> moments{};
  std::array<double, 4> bx{};
  std::array<double, 4> by{};
  for (const auto & p : points) {
    const double u = (p.t - t0) / span;
    double pow_u[7];
    pow_u[0] = 1.0;
    for (int k = 1; k < 7; ++k) {
      pow_u[k] = pow_u[k - 1] * u;
    }
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 4; ++c) {
        moments[r][c] += pow_u[r + c];
      }
      bx[r] += pow_u[r] * p.x;
      by[r] += pow_u[r] * p.y;
    }
  }

  CubicCurve out;
  out.coeffs_x = solve4(moments, bx);
  out.coeffs_y = solve4(moments, by);
  out.t_start = t0;
  out.t_end = t1;
  return out;
}

void check_fit_input(std::span<const TimedPoint> points)
{
  if (points.size() < 4) {
    throw Error("cubic fit needs at least 4 points, got " + std::to_string(points.size()));
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto & p = points[i];
    if (!std::isfinite(p.t) || !std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw Error("cubic fit input point " + std::to_string(i) + " is non-finite");
    }
    if (i > 0 && p.t <= points[i - 1].t) {
      throw Error("cubic fit timestamps must be strictly increasing");
    }
  }
}

}  // namespace

Vec2 CubicCurve::eval(double t) const
{
  const double u = to_u(t);
  double x, y;
  kernels::active().cubic_eval(coeffs_x.data(), coeffs_y.data(), &u, 1, &x, &y);
  return {x, y};
}

CubicCurve fit_cubic(std::span<const TimedPoint> points)
{
  check_fit_input(points);
  return fit_points(points);
}

std::vector<TimedPoint> sample_curve(const CubicCurve & curve, std::span<const double> times)
{
  if (times.empty()) {
    throw Error("sample_curve: empty time list");
  }
  constexpr double kSpanSlack = 1e-9;  // seconds, absorbs timestamp rounding
  std::vector<double> u(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < curve.t_start - kSpanSlack || times[i] > curve.t_end + kSpanSlack) {
      throw Error("sample_curve: time " + std::to_string(times[i]) + " outside curve span");
    }
    if (i > 0 && times[i] < times[i - 1]) {
      throw Error("sample_curve: times must be ascending");
    }
    u[i] = curve.to_u(times[i]);
  }
  std::vector<double> xs(times.size()), ys(times.size());
  kernels::active().cubic_eval(
    curve.coeffs_x.data(), curve.coeffs_y.data(), u.data(), u.size(), xs.data(), ys.data());
  std::vector<TimedPoint> out(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    out[i] = {times[i], xs[i], ys[i]};
  }
  return out;
}

TimedPoint curvature_point(const ControlGeometry & geom)
{
  const Vec2 cur = geom.current_point.pos();
  const Vec2 chord = geom.end_point - cur;
  const double len = chord.norm();
  if (len <= kDegenerateChord) {
    throw Error("curvature_point: degenerate chord");
  }
  const Vec2 mid = (cur + geom.end_point) * 0.5;
  const Vec2 n = chord.left_normal() * (1.0 / len);
  const Vec2 p = mid + n * geom.gamma;
  return {(geom.current_point.t + geom.t_end) * 0.5, p.x, p.y};
}

CubicCurve fit_from_controls(const Trajectory & history, const ControlGeometry & geom)
{
  validate_trajectory(history);
  if (!std::isfinite(geom.gamma) || !finite(geom.end_point)) {
    throw Error("fit_from_controls: non-finite control geometry");
  }
  if (geom.t_end <= history.points.back().t) {
    throw Error("fit_from_controls: t_end must be after the last history point");
  }

  std::vector<TimedPoint> pts(history.points.begin(), history.points.end());
  const Vec2 chord = geom.end_point - geom.current_point.pos();
  if (chord.norm() > kDegenerateChord) {
    pts.push_back(curvature_point(geom));
  }
  pts.push_back({geom.t_end, geom.end_point.x, geom.end_point.y});
  return fit_cubic(pts);
}

double gamma_of(const CubicCurve & c, const TimedPoint & current_point, const TimedPoint & end_point)
{
  const Vec2 cur = current_point.pos();
  const Vec2 end = end_point.pos();
  const Vec2 chord = end - cur;
  const double len = chord.norm();
  if (len <= kDegenerateChord) {
    throw Error("gamma_of: degenerate chord");
  }
  const Vec2 mid = (cur + end) * 0.5;
  const Vec2 n = chord.left_normal() * (1.0 / len);
  const double t_mid = (current_point.t + end_point.t) * 0.5;
  return (c.eval(t_mid) - mid).dot(n);
}

}  // namespace trajprop::curve
