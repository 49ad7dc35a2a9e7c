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

#include "trajprop/geo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace trajprop::geo
{
namespace
{

constexpr double kOnEdgeTolerance = 1e-12;  // meters; boundary-inclusive test

double distance_to_segment(const Vec2 & p, const Vec2 & a, const Vec2 & b)
{
  const Vec2 ab = b - a;
  const double len2 = ab.squared_norm();
  if (len2 == 0.0) {
    return (p - a).norm();
  }
  const double frac = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + ab * frac)).norm();
}

}  // namespace

void validate_area(const MovableArea & area)
{
  for (const auto & poly : area.polygons) {
    if (poly.size() < 3) {
      throw Error("area polygon needs at least 3 vertices");
    }
    for (std::size_t i = 0; i < poly.size(); ++i) {
      if (!finite(poly[i])) {
        throw Error("area polygon has non-finite vertex");
      }
      const Vec2 & next = poly[(i + 1) % poly.size()];
      if (poly[i].x == next.x && poly[i].y == next.y) {
        throw Error("area polygon has consecutive duplicate vertices");
      }
    }
  }
}

bool point_in_polygon(const Vec2 & p, const Polygon & poly)
{
  const std::size_t n = poly.size();
  int winding = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 & a = poly[i];
    const Vec2 & b = poly[(i + 1) % n];
    if (distance_to_segment(p, a, b) <= kOnEdgeTolerance) {
      return true;
    }
    const double side = (b - a).cross(p - a);
    if (a.y <= p.y) {
      if (b.y > p.y && side > 0.0) {
        ++winding;
      }
    } else {
      if (b.y <= p.y && side < 0.0) {
        --winding;
      }
    }
  }
  return winding != 0;
}

bool point_in_area(const Vec2 & p, const MovableArea & area)
{
  for (const auto & poly : area.polygons) {
    if (point_in_polygon(p, poly)) {
      return true;
    }
  }
  return false;
}

double outside_ratio(std::span<const Vec2> points, const MovableArea & area)
{
  if (points.empty()) {
    throw Error("outside_ratio: empty point sequence");
  }
  std::size_t outside = 0;
  for (const Vec2 & p : points) {
    if (!point_in_area(p, area)) {
      ++outside;
    }
  }
  return static_cast<double>(outside) / static_cast<double>(points.size());
}

double distance_to_boundary(const Vec2 & p, const MovableArea & area)
{
  if (area.polygons.empty()) {
    throw Error("distance_to_boundary: empty area");
  }
  double best = std::numeric_limits<double>::infinity();
  for (const auto & poly : area.polygons) {
    for (std::size_t i = 0; i < poly.size(); ++i) {
      best = std::min(best, distance_to_segment(p, poly[i], poly[(i + 1) % poly.size()]));
    }
  }
  return best;
}

double decay_score(double score, double r, double sigma)
{
  if (sigma <= 0.0) {
    throw Error("decay_score: sigma must be > 0");
  }
  return score * std::exp(-(r * r) / (sigma * sigma));
}

void apply_safety_filter(
  std::vector<proposal::Proposal> & proposals, const MovableArea & area, double sigma)
{
  for (auto & p : proposals) {
    if (!p.score.has_value()) {
      throw Error("safety filter: proposal has no score");
    }
    std::vector<Vec2> pts;
    pts.reserve(p.future_points.size());
    for (const auto & tp : p.future_points) {
      pts.push_back(tp.pos());
    }
    p.score = decay_score(*p.score, outside_ratio(pts, area), sigma);
  }
}

double dac(std::span<const std::vector<Vec2>> trajectories, const MovableArea & drivable)
{
  std::size_t total = 0;
  std::size_t inside = 0;
  for (const auto & traj : trajectories) {
    for (const Vec2 & p : traj) {
      ++total;
      if (point_in_area(p, drivable)) {
        ++inside;
      }
    }
  }
  if (total == 0) {
    throw Error("dac: no predicted points");
  }
  return static_cast<double>(inside) / static_cast<double>(total);
}

}  // namespace trajprop::geo
