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

#ifndef TRAJPROP_PREDICT_HPP_
#define TRAJPROP_PREDICT_HPP_

#include <optional>
#include <string>
#include <vector>

#include "trajprop/model.hpp"
#include "trajprop/scene.hpp"
#include "trajprop/types.hpp"

namespace trajprop::predict
{

struct PredictOptions
{
  std::size_t k = 6;        // ranked trajectories to keep
  double sigma = 0.5;       // safety-decay width
  bool use_safety = true;   // apply score decay when the scene has an area
  bool no_refine = false;   // ablation: keep the un-refined proposal geometry
  bool no_classify = false; // ablation: rank by distance to the stage-1 end
};

struct RankedPrediction
{
  double score = 0.0;
  std::vector<TimedPoint> points;
  Vec2 end_point{0.0, 0.0};
  double gamma = 0.0;
  std::optional<std::string> reference_line_id;
};

struct PredictionSet
{
  std::string scene_id;
  std::string agent_id;
  std::vector<RankedPrediction> predictions;  // scores non-increasing
  Vec2 stage1_end{0.0, 0.0};                  // base mode
  double d_ep = 0.0;                          // multimodal mode
  bool multimodal = false;
  bool safety_applied = false;
};

/// Full two-stage inference for one agent: stage 1 regresses the end point
/// (or d_ep), proposals are generated around it, stage 2 scores and refines
/// them, scores optionally decay by the movable-area outside ratio
/// (drivable area when no movable area exists), and the top-k by score
/// survive (ties keep generation order). The agent's history length must
/// match the checkpoint horizon.
PredictionSet predict_agent(
  const model::Checkpoint & ckpt, const Scene & scene, const Agent & agent,
  const PredictOptions & options);

/// predict_agent over every agent of the scene, in stored (id-sorted) order.
std::vector<PredictionSet> predict_scene(
  const model::Checkpoint & ckpt, const Scene & scene, const PredictOptions & options);

}  // namespace trajprop::predict

#endif  // TRAJPROP_PREDICT_HPP_
