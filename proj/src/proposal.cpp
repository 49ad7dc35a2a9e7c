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

#include "trajprop/proposal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

namespace trajprop::proposal
{
namespace
{

void check_pred_times(
  const Trajectory & history, double t_end, std::span<const double> pred_times)
{
  if (pred_times.empty()) {
    throw Error("proposal generation: empty prediction time list");
  }
  const double t_last = history.points.back().t;
  for (std::size_t i = 0; i < pred_times.size(); ++i) {
    if (pred_times[i] <= t_last || pred_times[i] > t_end + 1e-9) {
      throw Error("prediction time outside (last history t, t_end]");
    }
    if (i > 0 && pred_times[i] <= pred_times[i - 1]) {
      throw Error("prediction times must be strictly increasing");
    }
  }
}

// Symmetric offsets covering the full range: side_count values spaced by
// interval_m. Half-integer multiples appear when the step count is odd.
std::vector<double> grid_offsets(const GridConfig & cfg)
{
  const int side = cfg.side_count();
  const int steps = side - 1;
  std::vector<double> offsets(side);
  for (int k = 0; k < side; ++k) {
    offsets[k] = (static_cast<double>(k) - steps / 2.0) * cfg.interval_m;
  }
  return offsets;
}

// Arc-length evaluation that also extends backwards past the line start,
// mirroring the forward extrapolation rule. Grid samples near the start of
// short lines need it; the public arclength_point keeps its s >= 0 contract.
LinePoint eval_extended(const ReferenceLine & line, double s)
{
  if (s >= 0.0) {
    return arclength_point(line, s);
  }
  const Vec2 dir = (line.polyline[1] - line.polyline[0]).normalized();
  return {line.polyline[0] + dir * s, dir};
}

Proposal build_proposal(
  const Trajectory & history, const Vec2 & end, double gamma, double t_end,
  std::span<const double> pred_times)
{
  curve::ControlGeometry geom;
  geom.current_point = history.points.back();
  geom.end_point = end;
  geom.t_end = t_end;
  geom.gamma = gamma;

  Proposal p;
  p.end_point = end;
  p.gamma = gamma;
  p.curve = curve::fit_from_controls(history, geom);
  p.future_points = curve::sample_curve(p.curve, pred_times);
  return p;
}

}  // namespace

int GridConfig::side_count() const
{
  if (range_m < 0.0 || interval_m <= 0.0) {
    throw Error("grid config: range must be >= 0 and interval > 0");
  }
  if (gammas.empty()) {
    throw Error("grid config: gamma set must not be empty");
  }
  const double ratio = range_m / interval_m;
  const long steps = std::lround(ratio);
  if (std::abs(ratio - static_cast<double>(steps)) > 1e-9) {
    throw Error("grid config: range_m / interval_m must be an integer step count");
  }
  return static_cast<int>(steps) + 1;
}

ReferenceLine make_reference_line(std::string id, std::vector<Vec2> points)
{
  if (points.size() < 2) {
    throw Error("reference line '" + id + "' needs at least 2 points");
  }
  ReferenceLine line;
  line.id = std::move(id);
  line.arc_lengths.reserve(points.size());
  line.arc_lengths.push_back(0.0);
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (!finite(points[i]) || !finite(points[i - 1])) {
      throw Error("reference line '" + line.id + "' has non-finite points");
    }
    const double len = (points[i] - points[i - 1]).norm();
    if (len <= 0.0) {
      throw Error("reference line '" + line.id + "' has consecutive duplicate points");
    }
    line.arc_lengths.push_back(line.arc_lengths.back() + len);
  }
  line.polyline = std::move(points);
  return line;
}

Vec2 terminal_heading(const Trajectory & history)
{
  for (std::size_t i = history.points.size(); i-- > 1;) {
    const Vec2 step = history.points[i].pos() - history.points[i - 1].pos();
    if (step.norm() > 1e-12) {
      return step.normalized();
    }
  }
  return {1.0, 0.0};
}

std::vector<Vec2> generate_end_grid(const Vec2 & p_e, const GridConfig & cfg)
{
  const auto offsets = grid_offsets(cfg);
  std::vector<Vec2> out;
  out.reserve(offsets.size() * offsets.size());
  for (const double dx : offsets) {
    for (const double dy : offsets) {
      out.push_back({p_e.x + dx, p_e.y + dy});
    }
  }
  return out;
}

std::vector<Proposal> generate_base_proposals(
  const Trajectory & history, const Vec2 & p_e, const GridConfig & cfg, double t_end,
  std::span<const double> pred_times)
{
  validate_trajectory(history);
  check_pred_times(history, t_end, pred_times);

  const Vec2 axis_x = terminal_heading(history);
  const Vec2 axis_y = axis_x.left_normal();
  const auto offsets = grid_offsets(cfg);

  std::vector<Proposal> out;
  out.reserve(static_cast<std::size_t>(cfg.anchor_count()));
  for (const double di : offsets) {
    for (const double dj : offsets) {
      const Vec2 end = p_e + axis_x * di + axis_y * dj;
      for (const double gamma : cfg.gammas) {
        out.push_back(build_proposal(history, end, gamma, t_end, pred_times));
      }
    }
  }
  return out;
}

LinePoint arclength_point(const ReferenceLine & line, double s)
{
  if (s < 0.0) {
    throw Error("arclength_point: negative arc length");
  }
  const auto & arc = line.arc_lengths;
  const auto & pts = line.polyline;
  if (s >= arc.back()) {
    const std::size_t last = pts.size() - 1;
    const Vec2 dir = (pts[last] - pts[last - 1]).normalized();
    return {pts[last] + dir * (s - arc.back()), dir};
  }
  const auto it = std::upper_bound(arc.begin(), arc.end(), s);
  const std::size_t seg = static_cast<std::size_t>(it - arc.begin()) - 1;
  const Vec2 dir = (pts[seg + 1] - pts[seg]).normalized();
  return {pts[seg] + dir * (s - arc[seg]), dir};
}

LineProjection project_to_polyline(const Vec2 & p, const ReferenceLine & line)
{
  const auto & pts = line.polyline;
  double best_d2 = std::numeric_limits<double>::infinity();
  LineProjection best;
  Vec2 best_tangent{1.0, 0.0};
  Vec2 best_closest;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const Vec2 a = pts[i];
    const Vec2 ab = pts[i + 1] - a;
    const double len2 = ab.squared_norm();
    const double frac = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
    const Vec2 closest = a + ab * frac;
    const double d2 = (p - closest).squared_norm();
    if (d2 < best_d2) {  // strict: ties keep the earlier (smaller-s) segment
      best_d2 = d2;
      best.s = line.arc_lengths[i] + frac * std::sqrt(len2);
      best_tangent = ab.normalized();
      best_closest = closest;
    }
  }
  // Signed distance: magnitude from the closest point (which may be a
  // vertex), side from the containing segment's tangent.
  const double side = best_tangent.cross(p - best_closest);
  best.lateral = std::copysign(std::sqrt(best_d2), side);
  return best;
}

std::vector<Proposal> generate_multimodal_proposals(
  const Trajectory & history, std::span<const ReferenceLine> lines, double d_ep,
  const GridConfig & cfg, double t_end, std::span<const double> pred_times)
{
  if (lines.empty()) {
    throw Error("multimodal generation needs at least one reference line");
  }
  if (d_ep < 0.0) {
    throw Error("multimodal generation: d_ep must be >= 0");
  }
  validate_trajectory(history);
  check_pred_times(history, t_end, pred_times);

  const auto offsets = grid_offsets(cfg);
  std::vector<Proposal> out;
  out.reserve(lines.size() * static_cast<std::size_t>(cfg.anchor_count()));
  for (const auto & line : lines) {
    const double s0 = project_to_polyline(history.points.back().pos(), line).s + d_ep;
    const Vec2 normal = arclength_point(line, s0).tangent.left_normal();
    for (const double di : offsets) {
      const LinePoint along = eval_extended(line, s0 + di);
      for (const double dj : offsets) {
        const Vec2 end = along.point + normal * dj;
        for (const double gamma : cfg.gammas) {
          Proposal p = build_proposal(history, end, gamma, t_end, pred_times);
          p.reference_line_id = line.id;
          out.push_back(std::move(p));
        }
      }
    }
  }
  return out;
}

}  // namespace trajprop::proposal
