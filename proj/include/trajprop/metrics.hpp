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

#ifndef TRAJPROP_METRICS_HPP_
#define TRAJPROP_METRICS_HPP_

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "trajprop/scene.hpp"
#include "trajprop/types.hpp"

namespace trajprop::metrics
{

/// Mean pointwise Euclidean distance. Throws on length mismatch or emptiness.
double ade(std::span<const Vec2> pred, std::span<const Vec2> gt);

/// Euclidean distance between the final points.
double fde(std::span<const Vec2> pred, std::span<const Vec2> gt);

struct MinAdeFde
{
  double min_ade = 0.0;
  double min_fde = 0.0;
};

/// Independent minima over the prediction set: the best-ADE and best-FDE
/// predictions may differ. Throws when preds is empty.
MinAdeFde min_ade_fde(std::span<const std::vector<Vec2>> preds, std::span<const Vec2> gt);

/// Sum of weight[type] * value[type] over the value map. Every present type
/// must have a weight; extra weights are ignored. Weights must be >= 0.
double weighted_sum(
  const std::map<AgentType, double> & values, const std::map<AgentType, double> & weights);

struct TypeStats
{
  double ade = 0.0;
  double fde = 0.0;
  int count = 0;
};

/// Aggregated evaluation output. dac is present only when a drivable area
/// was available; wsade/wsfde only when type weights were configured.
struct MetricReport
{
  double ade = 0.0;
  double fde = 0.0;
  double min_ade = 0.0;
  double min_fde = 0.0;
  std::optional<double> dac;
  std::map<AgentType, TypeStats> per_type;
  std::optional<double> wsade;
  std::optional<double> wsfde;
  std::map<AgentType, double> type_weights;  // echoed when wsade/wsfde set
  int agent_count = 0;
};

}  // namespace trajprop::metrics

#endif  // TRAJPROP_METRICS_HPP_
