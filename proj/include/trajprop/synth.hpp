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

#ifndef TRAJPROP_SYNTH_HPP_
#define TRAJPROP_SYNTH_HPP_

#include <cstdint>
#include <vector>

#include "trajprop/scene.hpp"
#include "trajprop/types.hpp"

namespace trajprop::synth
{

/// Scene families:
///   constant_velocity / constant_acceleration: straight motion, mixed agent
///     types, no map.
///   lane_following: vehicle tracking a gently curving lane; the map carries
///     the lane as a reference line plus movable/drivable corridors.
///   intersection: vehicle approaching a crossing with 2-3 intention lines
///     (straight / left / right); the history ends before the turn begins so
///     the intention is not observable. Drivable area = corridor union.
struct SynthSpec
{
  std::size_t scenes = 100;
  Horizon horizon{3.0, 3.0, 0.5};
  double noise_std = 0.0;  // stddev of additive coordinate noise, meters
  std::uint64_t seed = 0;
  double w_constant_velocity = 1.0;  // family mix weights (need not sum to 1)
  double w_constant_acceleration = 1.0;
  double w_lane_following = 1.0;
  double w_intersection = 1.0;

  void validate() const;
};

/// Deterministic generator: a fixed spec yields byte-identical datasets.
/// Every scene has one agent whose ground-truth future stays inside the
/// scene's movable/drivable corridors (when the family has a map).
std::vector<Scene> synth_dataset(const SynthSpec & spec);

}  // namespace trajprop::synth

#endif  // TRAJPROP_SYNTH_HPP_
