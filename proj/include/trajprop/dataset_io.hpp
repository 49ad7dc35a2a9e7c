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

#ifndef TRAJPROP_DATASET_IO_HPP_
#define TRAJPROP_DATASET_IO_HPP_

#include <map>
#include <span>
#include <string>
#include <vector>

#include "trajprop/geo.hpp"
#include "trajprop/scene.hpp"
#include "trajprop/types.hpp"

namespace trajprop::io
{

/// Shortest decimal form that parses back to exactly the same double.
std::string format_double(double v);

/// Trajectory CSV schema, one observation per row:
///   scene_id,agent_id,agent_type,frame_index,t_seconds,x_m,y_m
/// Frames of an agent must appear in increasing frame order with the
/// horizon's dt spacing. Each agent needs exactly history_points() rows, or
/// history_points() + future_points() when ground truth is included; the
/// split happens at that count. Scenes and agents come back sorted by id.
/// Parse errors name the offending line.
std::vector<Scene> load_trajectories(const std::string & path, const Horizon & horizon);

/// Inverse of load_trajectories; doubles are written so they round-trip
/// exactly. Ids must not contain commas or newlines.
void save_trajectories(const std::string & path, std::span<const Scene> scenes);

/// Map JSON schema:
///   {"reference_lines": [{"id": ..., "points": [[x, y], ...]}, ...],
///    "movable_area": [[[x, y], ...], ...], "drivable_area": [...]}
/// Area keys are optional; polygons are implicitly closed. Reference-line ids
/// must be unique.
geo::MapContext load_map(const std::string & path);
void save_map(const std::string & path, const geo::MapContext & map);

/// A dataset directory holds trajectories.csv plus an optional maps.json
/// whose top-level object maps scene_id -> map object (schema above).
std::vector<Scene> load_dataset(const std::string & dir, const Horizon & horizon);
void save_dataset(const std::string & dir, std::span<const Scene> scenes);

}  // namespace trajprop::io

#endif  // TRAJPROP_DATASET_IO_HPP_
