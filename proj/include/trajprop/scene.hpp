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

#ifndef TRAJPROP_SCENE_HPP_
#define TRAJPROP_SCENE_HPP_

#include <optional>
#include <string>
#include <vector>

#include "trajprop/geo.hpp"
#include "trajprop/types.hpp"

namespace trajprop
{

enum class AgentType { vehicle, pedestrian, cyclist };

const char * to_string(AgentType type);

/// Parses "vehicle" / "pedestrian" / "cyclist"; throws Error otherwise.
AgentType agent_type_from_string(const std::string & name);

/// One agent in a scene, split into observed history and ground-truth future.
/// The future may be empty for inference-only data.
struct Agent
{
  std::string id;
  AgentType type = AgentType::vehicle;
  Trajectory history;
  Trajectory future;
};

struct Scene
{
  std::string id;
  std::vector<Agent> agents;        // sorted by agent id on load
  std::optional<geo::MapContext> map;
};

}  // namespace trajprop

#endif  // TRAJPROP_SCENE_HPP_
