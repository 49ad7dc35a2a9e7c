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

#include "trajprop/predict.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <utility>

#include "trajprop/curve.hpp"
#include "trajprop/geo.hpp"
#include "trajprop/proposal.hpp"

namespace trajprop::predict
{
namespace
{

// Ranking keys: score descending, then (for the no-classify ablation)
// smaller |gamma|, then generation order.
struct RankKey
{
  double score = 0.0;
  double abs_gamma = 0.0;
  std::size_t index = 0;
};

}  // namespace

PredictionSet predict_agent(
  const model::Checkpoint & ckpt, const Scene & scene, const Agent & agent,
  const PredictOptions & options)
{
  if (options.k < 1) {
    throw Error("predict: k must be >= 1");
  }
  if (!ckpt.model.trained) {
    throw Error("predict: model is not trained");
  }
  const Trajectory & history = agent.history;
  if (
    history.points.size() !=
    static_cast<std::size_t>(ckpt.horizon.history_points())) {
    throw Error(
      "predict: history of agent '" + agent.id + "' does not match the checkpoint horizon");
  }
  validate_trajectory(history);

  const geo::MapContext * map_ctx = scene.map ? &*scene.map : nullptr;
  if (ckpt.model.features.use_map && map_ctx == nullptr) {
    throw Error("predict: model expects map features but scene '" + scene.id + "' has no map");
  }
  const geo::MapContext * feat_map = ckpt.model.features.use_map ? map_ctx : nullptr;

  // Stage 1.
  const model::EgoFrame frame = model::ego_frame(history);
  const auto hist_feats = model::extract_history_features(history, feat_map);
  const auto stage1 = model::mlp_forward(ckpt.model.endpoint, hist_feats);

  const double t_last = history.points.back().t;
  const long n_pre = ckpt.horizon.future_points();
  std::vector<double> times(static_cast<std::size_t>(n_pre));
  for (long i = 1; i <= n_pre; ++i) {
    times[static_cast<std::size_t>(i - 1)] = t_last + ckpt.horizon.dt * static_cast<double>(i);
  }
  const double t_end = times.back();

  PredictionSet out;
  out.scene_id = scene.id;
  out.agent_id = agent.id;
  out.multimodal = ckpt.model.mode == model::Mode::multimodal;

  std::vector<proposal::Proposal> proposals;
  std::map<std::string, Vec2> line_centers;
  if (!out.multimodal) {
    out.stage1_end = frame.to_world({stage1[0], stage1[1]});
    proposals =
      proposal::generate_base_proposals(history, out.stage1_end, ckpt.grid, t_end, times);
  } else {
    if (map_ctx == nullptr || map_ctx->reference_lines.empty()) {
      throw Error(
        "predict: multimodal mode needs reference lines in scene '" + scene.id + "'");
    }
    out.d_ep = std::max(0.0, stage1[0]);
    proposals = proposal::generate_multimodal_proposals(
      history, map_ctx->reference_lines, out.d_ep, ckpt.grid, t_end, times);
    for (const auto & line : map_ctx->reference_lines) {
      const double s0 = proposal::project_to_polyline(frame.origin, line).s + out.d_ep;
      line_centers[line.id] = proposal::arclength_point(line, s0).point;
    }
  }

  // Stage 2: score + refine. Proposals are grouped per grid center so the
  // stage-1-distance feature refers to the center they were generated from.
  std::vector<proposal::Proposal> scored;
  scored.reserve(proposals.size());
  if (!out.multimodal) {
    model::ScoreContext ctx;
    ctx.map = map_ctx;
    ctx.stage1_end = out.stage1_end;
    scored = model::score_and_refine(ckpt.model, history, proposals, ctx);
  } else {
    std::size_t offset = 0;
    const std::size_t per_line = proposals.size() / map_ctx->reference_lines.size();
    for (const auto & line : map_ctx->reference_lines) {
      model::ScoreContext ctx;
      ctx.map = map_ctx;
      ctx.stage1_end = line_centers.at(line.id);
      const std::span<const proposal::Proposal> group(proposals.data() + offset, per_line);
      auto part = model::score_and_refine(ckpt.model, history, group, ctx);
      for (auto & p : part) {
        scored.push_back(std::move(p));
      }
      offset += per_line;
    }
  }

  if (options.no_refine) {
    // Keep the raw proposal geometry; only the scores survive.
    for (std::size_t i = 0; i < scored.size(); ++i) {
      const double score = scored[i].score.value();
      scored[i] = proposals[i];
      scored[i].score = score;
    }
  }
  if (options.no_classify) {
    // Rank by proximity to the stage-1 output instead of learned scores.
    for (std::size_t i = 0; i < scored.size(); ++i) {
      const Vec2 center = out.multimodal
                            ? line_centers.at(scored[i].reference_line_id.value())
                            : out.stage1_end;
      scored[i].score = 1.0 / (1.0 + distance(proposals[i].end_point, center));
    }
  }

  // Safety decay.
  const geo::MovableArea * area = nullptr;
  if (options.use_safety && map_ctx != nullptr) {
    area = map_ctx->movable_area   ? &*map_ctx->movable_area
           : map_ctx->drivable_area ? &*map_ctx->drivable_area
                                    : nullptr;
  }
  if (area != nullptr) {
    geo::apply_safety_filter(scored, *area, options.sigma);
    out.safety_applied = true;
  }

  // Rank: score desc; equal scores fall back to |gamma| (meaningful for the
  // no-classify ablation) and then to generation order.
  std::vector<RankKey> keys(scored.size());
  for (std::size_t i = 0; i < scored.size(); ++i) {
    keys[i] = {scored[i].score.value(), std::abs(scored[i].gamma), i};
  }
  std::sort(keys.begin(), keys.end(), [](const RankKey & a, const RankKey & b) {
    if (a.score != b.score) {
      return a.score > b.score;
    }
    if (a.abs_gamma != b.abs_gamma) {
      return a.abs_gamma < b.abs_gamma;
    }
    return a.index < b.index;
  });

  const std::size_t keep = std::min(options.k, keys.size());
  out.predictions.reserve(keep);
  for (std::size_t r = 0; r < keep; ++r) {
    const proposal::Proposal & p = scored[keys[r].index];
    RankedPrediction pred;
    pred.score = p.score.value();
    pred.points = p.future_points;
    pred.end_point = p.end_point;
    pred.gamma = p.gamma;
    pred.reference_line_id = p.reference_line_id;
    out.predictions.push_back(std::move(pred));
  }
  return out;
}

std::vector<PredictionSet> predict_scene(
  const model::Checkpoint & ckpt, const Scene & scene, const PredictOptions & options)
{
  std::vector<PredictionSet> out;
  out.reserve(scene.agents.size());
  for (const Agent & agent : scene.agents) {
    out.push_back(predict_agent(ckpt, scene, agent, options));
  }
  return out;
}

}  // namespace trajprop::predict
