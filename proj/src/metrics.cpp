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

#include "trajprop/metrics.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "trajprop/kernels.hpp"

namespace trajprop::metrics
{
namespace
{

static_assert(sizeof(Vec2) == 2 * sizeof(double), "Vec2 must pack as interleaved xy");

const double * as_xy(std::span<const Vec2> points)
{
  return reinterpret_cast<const double *>(points.data());
}

void check_pair(std::span<const Vec2> pred, std::span<const Vec2> gt)
{
  if (pred.empty()) {
    throw Error("displacement metric: empty trajectory");
  }
  if (pred.size() != gt.size()) {
    throw Error("displacement metric: prediction / ground-truth length mismatch");
  }
}

}  // namespace

double ade(std::span<const Vec2> pred, std::span<const Vec2> gt)
{
  check_pair(pred, gt);
  return kernels::active().mean_point_distance(as_xy(pred), as_xy(gt), pred.size());
}

double fde(std::span<const Vec2> pred, std::span<const Vec2> gt)
{
  check_pair(pred, gt);
  return distance(pred.back(), gt.back());
}

MinAdeFde min_ade_fde(std::span<const std::vector<Vec2>> preds, std::span<const Vec2> gt)
{
  if (preds.empty()) {
    throw Error("min_ade_fde: empty prediction set");
  }
  MinAdeFde out;
  out.min_ade = std::numeric_limits<double>::infinity();
  out.min_fde = std::numeric_limits<double>::infinity();
  for (const auto & pred : preds) {
    out.min_ade = std::min(out.min_ade, ade(pred, gt));
    out.min_fde = std::min(out.min_fde, fde(pred, gt));
  }
  return out;
}

double weighted_sum(
  const std::map<AgentType, double> & values, const std::map<AgentType, double> & weights)
{
  double total = 0.0;
  for (const auto & [type, value] : values) {
    const auto it = weights.find(type);
    if (it == weights.end()) {
      throw Error(std::string("weighted_sum: missing weight for type '") + to_string(type) + "'");
    }
    if (it->second < 0.0) {
      throw Error("weighted_sum: weights must be >= 0");
    }
    total += it->second * value;
  }
  return total;
}

}  // namespace trajprop::metrics
