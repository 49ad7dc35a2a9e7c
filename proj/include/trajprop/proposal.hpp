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

#ifndef TRAJPROP_PROPOSAL_HPP_
#define TRAJPROP_PROPOSAL_HPP_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trajprop/curve.hpp"
#include "trajprop/types.hpp"

namespace trajprop::proposal
{

/// End-point grid configuration. range_m is the full extent per axis, so the
/// grid has range_m / interval_m + 1 points per side. Anchor count is
/// side^2 * |gammas|; the defaults give the 7 x 7 x 5 = 245 anchor set.
struct GridConfig
{
  double range_m{6.0};
  double interval_m{1.0};
  std::vector<double> gammas{-2.0, -1.0, 0.0, 1.0, 2.0};

  /// Grid points per side; throws unless range_m / interval_m is an integer
  /// within 1e-9.
  int side_count() const;
  int anchor_count() const { return side_count() * side_count() * static_cast<int>(gammas.size()); }
};

/// A candidate future trajectory: hypothesized end point and gamma, the
/// fitted cubic, and its samples at the prediction timestamps. score stays
/// unset until the proposal has been classified.
struct Proposal
{
  Vec2 end_point;
  double gamma{0.0};
  curve::CubicCurve curve;
  std::vector<TimedPoint> future_points;
  std::optional<double> score;
  bool refined{false};
  std::optional<std::string> reference_line_id;
};

/// A lane centerline: ordered distinct points plus cumulative arc lengths
/// (first entry 0). Build through make_reference_line so the invariants hold.
struct ReferenceLine
{
  std::string id;
  std::vector<Vec2> polyline;
  std::vector<double> arc_lengths;
};

ReferenceLine make_reference_line(std::string id, std::vector<Vec2> points);

struct LinePoint
{
  Vec2 point;
  Vec2 tangent;  // unit direction of the containing segment
};

struct LineProjection
{
  double s{0.0};        // arc length of the closest point
  double lateral{0.0};  // signed distance, positive left of the tangent
};

/// The N x N axis-aligned end-point grid centered at p_e, row-major
/// (x offsets outer, y offsets inner).
std::vector<Vec2> generate_end_grid(const Vec2 & p_e, const GridConfig & cfg);

/// One proposal per grid end point x gamma, fitted through the history and
/// control points and sampled at pred_times. The grid axes are aligned with
/// the history's terminal heading so that the proposal set transforms
/// rigidly with its inputs; a stationary history falls back to world axes.
std::vector<Proposal> generate_base_proposals(
  const Trajectory & history, const Vec2 & p_e, const GridConfig & cfg, double t_end,
  std::span<const double> pred_times);

/// Point and tangent at arc length s >= 0; s beyond the line end continues
/// along the final segment direction.
LinePoint arclength_point(const ReferenceLine & line, double s);

/// Closest point on the polyline; ties between segments resolve to the
/// smaller arc length.
LineProjection project_to_polyline(const Vec2 & p, const ReferenceLine & line);

/// Line-aligned grids: per reference line the grid is centered at arc length
/// s0 = project(last history point) + d_ep, longitudinal samples walk the
/// line by arc length and lateral offsets use the left normal at s0. Each
/// proposal carries its reference line id. Total count is
/// |lines| * side^2 * |gammas|.
std::vector<Proposal> generate_multimodal_proposals(
  const Trajectory & history, std::span<const ReferenceLine> lines, double d_ep,
  const GridConfig & cfg, double t_end, std::span<const double> pred_times);

/// Unit direction of the last history displacement; {1, 0} for a stationary
/// history. Shared by proposal generation and feature extraction.
Vec2 terminal_heading(const Trajectory & history);

}  // namespace trajprop::proposal

#endif  // TRAJPROP_PROPOSAL_HPP_
