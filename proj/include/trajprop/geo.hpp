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

#ifndef TRAJPROP_GEO_HPP_
#define TRAJPROP_GEO_HPP_

#include <optional>
#include <span>
#include <vector>

#include "trajprop/proposal.hpp"
#include "trajprop/types.hpp"

namespace trajprop::geo
{

/// Implicitly closed simple polygon (last vertex connects back to the first).
using Polygon = std::vector<Vec2>;

/// Union of polygons describing where an agent may travel. The same type
/// doubles as the drivable area used by the DAC metric.
struct MovableArea
{
  std::vector<Polygon> polygons;
};

/// Throws Error unless every polygon has >= 3 finite vertices and no
/// consecutive duplicates.
void validate_area(const MovableArea & area);

/// Map data attached to a scene.
struct MapContext
{
  std::vector<proposal::ReferenceLine> reference_lines;
  std::optional<MovableArea> movable_area;
  std::optional<MovableArea> drivable_area;
};

/// Nonzero-winding containment test; points on an edge count as inside.
bool point_in_polygon(const Vec2 & p, const Polygon & poly);

/// True iff p lies inside (or on the boundary of) any polygon of the union.
bool point_in_area(const Vec2 & p, const MovableArea & area);

/// Fraction of points with point_in_area == false. Throws on an empty span.
double outside_ratio(std::span<const Vec2> points, const MovableArea & area);

/// Distance from p to the nearest polygon edge of the union (0 on an edge,
/// regardless of which side p lies on). Throws on an empty area.
double distance_to_boundary(const Vec2 & p, const MovableArea & area);

/// score * exp(-r^2 / sigma^2). Throws unless sigma > 0.
double decay_score(double score, double r, double sigma);

/// Replaces each proposal's score with its decayed value based on the
/// outside ratio of its future points. Geometry is left untouched. Throws if
/// any proposal is unscored.
void apply_safety_filter(
  std::vector<proposal::Proposal> & proposals, const MovableArea & area, double sigma);

/// Drivable-area compliance: total inside-point count over total point count
/// across all trajectories. Throws when there are no points at all.
double dac(std::span<const std::vector<Vec2>> trajectories, const MovableArea & drivable);

}  // namespace trajprop::geo

#endif  // TRAJPROP_GEO_HPP_
