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

#ifndef TRAJPROP_MODEL_HPP_
#define TRAJPROP_MODEL_HPP_

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "trajprop/geo.hpp"
#include "trajprop/labeling.hpp"
#include "trajprop/proposal.hpp"
#include "trajprop/rng.hpp"
#include "trajprop/types.hpp"

namespace trajprop::model
{

/// Agent-centric coordinate frame: origin at the last observed point, x-axis
/// along the terminal heading. Features expressed here are invariant under
/// world rigid transforms, which makes inference equivariant.
struct EgoFrame
{
  Vec2 origin{0.0, 0.0};
  Vec2 axis_x{1.0, 0.0};
  Vec2 axis_y{0.0, 1.0};

  Vec2 to_ego(const Vec2 & p) const
  {
    const Vec2 d = p - origin;
    return {axis_x.dot(d), axis_y.dot(d)};
  }
  Vec2 to_world(const Vec2 & p) const { return origin + axis_x * p.x + axis_y * p.y; }
};

EgoFrame ego_frame(const Trajectory & history);

/// Fixed feature layout for a model instance. With H history points and F
/// future points:
///   history block: per-step displacements 2(H-1), speeds (H-1),
///                  accelerations (H-2), heading changes (H-2)  -> 5H-7
///   map block (when use_map): distance to nearest reference line, heading
///                  offset against it, distance to movable-area boundary -> 3
///   proposal block: ego end-point offset 2, gamma 1, per-step future
///                  displacements 2F, distance to the stage-1 end point 1
struct FeatureConfig
{
  std::size_t history_points = 0;
  std::size_t future_points = 0;
  bool use_map = false;

  std::size_t history_dim() const;   // 5H - 7 (+3 with use_map)
  std::size_t proposal_dim() const;  // history_dim() + 2F + 4
};

/// History features in the ego frame; the map block is emitted iff `map` is
/// non-null. Throws when the history has fewer than 2 points.
std::vector<double> extract_history_features(
  const Trajectory & history, const geo::MapContext * map);

/// History features plus the per-proposal block. `stage1_end` is the grid
/// center the proposal was generated around.
std::vector<double> extract_proposal_features(
  const Trajectory & history, const geo::MapContext * map, const proposal::Proposal & p,
  const Vec2 & stage1_end);

enum class Activation { identity, relu, logistic };

struct Layer
{
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> w;  // row-major, out x in
  std::vector<double> b;  // out
  Activation act = Activation::identity;
};

struct Mlp
{
  std::vector<Layer> layers;

  std::size_t input_size() const { return layers.empty() ? 0 : layers.front().in; }
  std::size_t output_size() const { return layers.empty() ? 0 : layers.back().out; }
  std::size_t parameter_count() const;
};

/// Fully connected net with the given layer sizes (first = input dim, last =
/// output dim), rectifier hidden activations, and the requested output
/// activation. Weights start uniform in ±sqrt(6/(in+out)), biases at zero.
Mlp make_mlp(std::span<const std::size_t> sizes, Activation output_activation, Rng & rng);

/// Per-layer intermediate values captured during a forward pass, consumed by
/// mlp_backward.
struct ForwardTrace
{
  std::vector<std::vector<double>> pre;   // affine outputs per layer
  std::vector<std::vector<double>> post;  // activated outputs per layer
};

/// Applies the net to x. Throws on an input length mismatch.
std::vector<double> mlp_forward(
  const Mlp & m, std::span<const double> x, ForwardTrace * trace = nullptr);

struct MlpGrads
{
  std::vector<std::vector<double>> dw;
  std::vector<std::vector<double>> db;
};

MlpGrads make_zero_grads(const Mlp & m);

/// Accumulates (+=) exact reverse-mode gradients of the forward pass into
/// `grads`, given d(loss)/d(output) in `upstream`.
void mlp_backward(
  const Mlp & m, std::span<const double> x, const ForwardTrace & trace,
  std::span<const double> upstream, MlpGrads & grads);

/// Adam first/second-moment state, one pair of buffers per parameter tensor.
struct AdamState
{
  std::vector<std::vector<double>> m_w, v_w, m_b, v_b;
  long step = 0;
};

AdamState make_adam_state(const Mlp & m);

void adam_step(
  Mlp & m, const MlpGrads & grads, AdamState & state, double lr, double beta1 = 0.9,
  double beta2 = 0.999, double eps = 1e-8);

/// base: stage 1 regresses the end point (2 outputs, ego frame).
/// multimodal: stage 1 regresses the along-lane displacement d_ep (1 output).
enum class Mode { base, multimodal };

struct TwoStageModel
{
  Mode mode = Mode::base;
  FeatureConfig features;
  Mlp endpoint;  // history features -> end point / d_ep
  Mlp scorer;    // proposal features -> [confidence logit, t_x, t_y, t_gamma]
  bool trained = false;
};

/// Builds both nets with the shared hidden widths (default {64, 64} when
/// empty) and deterministic seeded initialization.
TwoStageModel make_model(
  Mode mode, const FeatureConfig & features, std::span<const std::size_t> hidden_sizes,
  std::uint64_t seed);

struct TrainConfig
{
  std::size_t batch_size = 128;
  std::size_t epochs = 50;
  double learning_rate = 1e-3;
  double lr_decay = 0.9;      // multiplied into the rate after each epoch
  double alpha = 1.0;         // refinement-term weight
  double beta = 1.0;          // negative weight in the refinement normalizer
  double ad_threshold = 3.0;  // meters; positive-label cutoff
  double negative_ratio = 3.0;
  bool augment = true;        // random scene rotation + axis flip
  std::uint64_t seed = 0;

  void validate() const;  // throws on non-positive values
};

/// One selected (positive or sampled negative) proposal in a frozen batch.
/// targets hold the refinement deltas rotated into the history's ego frame
/// (the frame the scorer predicts in); t_gamma is frame-independent.
struct ProposalSample
{
  std::vector<double> features;
  bool is_positive = false;
  labeling::RefinementTargets targets;
};

/// One scene in a frozen batch: stage-1 input/target plus the selected
/// stage-2 proposals with precomputed features.
struct SceneSample
{
  std::vector<double> endpoint_features;
  std::vector<double> endpoint_target;  // length 2 (base) or 1 (multimodal)
  std::vector<ProposalSample> proposals;
};

struct LossValue
{
  double total = 0.0;
  double endpoint = 0.0;
  double classification = 0.0;
  double refinement = 0.0;
};

struct LossGrads
{
  MlpGrads endpoint;
  MlpGrads scorer;
};

/// Multi-task objective, averaged over the scenes of the batch. Per scene:
///   endpoint term: Euclidean distance between regressed and target end point
///     (absolute difference of displacements in multimodal mode);
///   classification term: binary cross entropy over the selected proposals,
///     averaged, probabilities clamped to [1e-7, 1 - 1e-7];
///   refinement term: Euclidean norm of (t_x, t_y, t_gamma) residuals,
///     negatives weighted by beta, summed over the selected proposals, times
///     alpha, divided by n_pos + beta * n_neg (0 when the denominator is 0).
/// When `grads` is non-null the exact parameter gradients are accumulated
/// into it. Throws on an empty batch.
LossValue multitask_loss(
  const TwoStageModel & m, std::span<const SceneSample> batch, const TrainConfig & cfg,
  LossGrads * grads = nullptr);

/// One agent's worth of training data. gt_full is the observed history plus
/// the ground-truth future in one trajectory; map may be null (required
/// non-null with reference lines in multimodal mode).
struct TrainingExample
{
  Trajectory history;
  Trajectory gt_full;
  std::shared_ptr<const geo::MapContext> map;
};

/// Builds the frozen batch entry for one example: runs stage 1 with the
/// current model, generates proposals around its output, labels them against
/// the ground truth, samples negatives with `sample_seed`, and extracts
/// features. Exposed for tests; train() uses it per batch.
SceneSample make_scene_sample(
  const TwoStageModel & m, const TrainingExample & example, const proposal::GridConfig & grid,
  const TrainConfig & cfg, std::uint64_t sample_seed);

struct EpochStats
{
  std::size_t epoch = 0;
  double mean_total = 0.0;
  double mean_endpoint = 0.0;
  double mean_classification = 0.0;
  double mean_refinement = 0.0;
  double learning_rate = 0.0;
};

/// Mini-batch Adam on multitask_loss. Proposals are regenerated from the
/// current stage-1 output every time a scene is batched, so stage 2 tracks
/// stage 1 as it improves. Deterministic for a fixed seed. Returns per-epoch
/// mean losses; marks the model trained when epochs >= 1.
std::vector<EpochStats> train(
  std::span<const TrainingExample> dataset, TwoStageModel & m, const proposal::GridConfig & grid,
  const TrainConfig & cfg);

struct ScoreContext
{
  const geo::MapContext * map = nullptr;  // must match features.use_map
  Vec2 stage1_end{0.0, 0.0};              // grid center of these proposals
};

/// Stage 2: scores every proposal (logistic of the confidence logit) and
/// applies the regressed refinement to its end point and gamma, re-fitting
/// the curve and re-sampling the future points. Throws on an untrained model
/// or a feature dimension mismatch.
std::vector<proposal::Proposal> score_and_refine(
  const TwoStageModel & m, const Trajectory & history,
  std::span<const proposal::Proposal> proposals, const ScoreContext & ctx);

/// Model plus the data contract it was trained under.
struct Checkpoint
{
  TwoStageModel model;
  Horizon horizon;
  proposal::GridConfig grid;
};

/// Versioned JSON container; byte-identical for identical content. Loading
/// rejects unknown format or feature-layout versions and inconsistent shapes.
void save_checkpoint(const std::string & path, const Checkpoint & ckpt);
Checkpoint load_checkpoint(const std::string & path);

}  // namespace trajprop::model

#endif  // TRAJPROP_MODEL_HPP_
