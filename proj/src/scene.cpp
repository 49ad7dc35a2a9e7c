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

#include "trajprop/scene.hpp"

namespace trajprop
{

const char * to_string(AgentType type)
{
  switch (type) {
    case AgentType::vehicle:
      return "vehicle";
    case AgentType::pedestrian:
      return "pedestrian";
    case AgentType::cyclist:
      return "cyclist";
  }
  throw Error("unknown agent type value");
}

AgentType agent_type_from_string(const std::string & name)
{
  if (name == "vehicle") {
    return AgentType::vehicle;
  }
  if (name == "pedestrian") {
    return AgentType::pedestrian;
  }
  if (name == "cyclist") {
    return AgentType::cyclist;
  }
  throw Error("unknown agent type '" + name + "'");
}

}  // namespace trajprop
