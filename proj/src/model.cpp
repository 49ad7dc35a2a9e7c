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

#include "trajprop/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <utility>

#include <json.hpp>

#include "trajprop/curve.hpp"
#include "trajprop/kernels.hpp"

namespace trajprop::model
{
namespace
{

using nlohmann::json;

constexpr int kCheckpointFormatVersion = 1;
constexpr int kFeatureLayoutVersion = 1;
constexpr double kProbClamp = 1e-7;
constexpr double kZeroResidual = 1e-12;

double stable_logistic(double z)
{
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double signed_angle(const Vec2 & a, const Vec2 & b)
{
  if (a.norm() < 1e-12 || b.norm() < 1e-12) {
    return 0.0;
  }
  return std::atan2(a.cross(b), a.dot(b));
}

double activation_derivative(Activation act, double pre, double post)
{
  switch (act) {
    case Activation::identity:
      return 1.0;
    case Activation::relu:
      return pre > 0.0 ? 1.0 : 0.0;
    case Activation::logistic:
      return post * (1.0 - post);
  }
  throw Error("unknown activation");
}

const char * activation_name(Activation act)
{
  switch (act) {
    case Activation::identity:
      return "identity";
    case Activation::relu:
      return "relu";
    case Activation::logistic:
      return "logistic";
  }
  throw Error("unknown activation");
}

Activation activation_from_name(const std::string & name)
{
  if (name == "identity") {
    return Activation::identity;
  }
  if (name == "relu") {
    return Activation::relu;
  }
  if (name == "logistic") {
    return Activation::logistic;
  }
  throw Error("unknown activation '" + name + "'");
}

// Prediction timestamps = gt timestamps strictly after the history end.
std::vector<double> future_times(const Trajectory & gt_full, double t_last_history)
{
  std::vector<double> times;
  for (const auto & tp : gt_full.points) {
    if (tp.t > t_last_history + 1e-9) {
      times.push_back(tp.t);
    }
  }
  if (times.empty()) {
    throw Error("training example has no future points");
  }
  return times;
}

}  // namespace

EgoFrame ego_frame(const Trajectory & history)
{
  if (history.points.size() < 2) {
    throw Error("ego frame needs at least 2 history points");
  }
  EgoFrame frame;
  frame.origin = history.points.back().pos();
  frame.axis_x = proposal::terminal_heading(history);
  frame.axis_y = frame.axis_x.left_normal();
  return frame;
}

std::size_t FeatureConfig::history_dim() const
{
  if (history_points < 2) {
    throw Error("feature config: need at least 2 history points");
  }
  return 5 * history_points - 7 + (use_map ? 3 : 0);
}

std::size_t FeatureConfig::proposal_dim() const
{
  if (future_points < 1) {
    throw Error("feature config: need at least 1 future point");
  }
  return history_dim() + 2 * future_points + 4;
}

std::vector<double> extract_history_features(
  const Trajectory & history, const geo::MapContext * map)
{
  validate_trajectory(history);
  const auto & pts = history.points;
  const std::size_t h = pts.size();
  const EgoFrame frame = ego_frame(history);

  std::vector<Vec2> steps(h - 1);
  std::vector<double> speeds(h - 1);
  for (std::size_t i = 1; i < h; ++i) {
    steps[i - 1] = pts[i].pos() - pts[i - 1].pos();
    speeds[i - 1] = steps[i - 1].norm() / (pts[i].t - pts[i - 1].t);
  }

  std::vector<double> feats;
  feats.reserve(5 * h - 7 + (map != nullptr ? 3 : 0));
  for (const Vec2 & s : steps) {
    feats.push_back(frame.axis_x.dot(s));
    feats.push_back(frame.axis_y.dot(s));
  }
  for (const double v : speeds) {
    feats.push_back(v);
  }
  for (std::size_t i = 1; i < h - 1; ++i) {
    feats.push_back((speeds[i] - speeds[i - 1]) / (pts[i + 1].t - pts[i].t));
  }
  for (std::size_t i = 1; i < h - 1; ++i) {
    feats.push_back(signed_angle(steps[i - 1], steps[i]));
  }

  if (map != nullptr) {
    double line_dist = 0.0;
    double heading_offset = 0.0;
    if (!map->reference_lines.empty()) {
      double best = std::numeric_limits<double>::infinity();
      Vec2 best_tangent{1.0, 0.0};
      for (const auto & line : map->reference_lines) {
        const auto proj = proposal::project_to_polyline(frame.origin, line);
        const auto lp = proposal::arclength_point(line, proj.s);
        const double d = distance(frame.origin, lp.point);
        if (d < best) {
          best = d;
          best_tangent = lp.tangent;
        }
      }
      line_dist = best;
      heading_offset = signed_angle(frame.axis_x, best_tangent);
    }
    double boundary_dist = 0.0;
    const geo::MovableArea * area = map->movable_area ? &*map->movable_area
                                    : map->drivable_area ? &*map->drivable_area
                                                         : nullptr;
    if (area != nullptr && !area->polygons.empty()) {
      boundary_dist = geo::distance_to_boundary(frame.origin, *area);
    }
    feats.push_back(line_dist);
    feats.push_back(heading_offset);
    feats.push_back(boundary_dist);
  }
  return feats;
}

std::vector<double> extract_proposal_features(
  const Trajectory & history, const geo::MapContext * map, const proposal::Proposal & p,
  const Vec2 & stage1_end)
{
  std::vector<double> feats = extract_history_features(history, map);
  const EgoFrame frame = ego_frame(history);

  const Vec2 ego_end = frame.to_ego(p.end_point);
  feats.push_back(ego_end.x);
  feats.push_back(ego_end.y);
  feats.push_back(p.gamma);

  Vec2 prev = history.points.back().pos();
  for (const auto & fp : p.future_points) {
    const Vec2 step = fp.pos() - prev;
    feats.push_back(frame.axis_x.dot(step));
    feats.push_back(frame.axis_y.dot(step));
    prev = fp.pos();
  }
  feats.push_back(distance(p.end_point, stage1_end));
  return feats;
}

std::size_t Mlp::parameter_count() const
{
  std::size_t n = 0;
  for (const auto & l : layers) {
    n += l.w.size() + l.b.size();
  }
  return n;
}

Mlp make_mlp(std::span<const std::size_t> sizes, Activation output_activation, Rng & rng)
{
  if (sizes.size() < 2) {
    throw Error("make_mlp: need at least input and output sizes");
  }
  Mlp m;
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
    if (sizes[i] == 0 || sizes[i + 1] == 0) {
      throw Error("make_mlp: zero layer size");
    }
    Layer l;
    l.in = sizes[i];
    l.out = sizes[i + 1];
    l.act = (i + 2 == sizes.size()) ? output_activation : Activation::relu;
    const double bound = std::sqrt(6.0 / static_cast<double>(l.in + l.out));
    l.w.resize(l.out * l.in);
    for (double & w : l.w) {
      w = rng.uniform(-bound, bound);
    }
    l.b.assign(l.out, 0.0);
    m.layers.push_back(std::move(l));
  }
  return m;
}

std::vector<double> mlp_forward(const Mlp & m, std::span<const double> x, ForwardTrace * trace)
{
  if (m.layers.empty()) {
    throw Error("mlp_forward: empty network");
  }
  if (x.size() != m.input_size()) {
    throw Error("mlp_forward: feature dimension mismatch");
  }
  if (trace != nullptr) {
    trace->pre.assign(m.layers.size(), {});
    trace->post.assign(m.layers.size(), {});
  }

  std::vector<double> cur(x.begin(), x.end());
  std::vector<double> next;
  for (std::size_t li = 0; li < m.layers.size(); ++li) {
    const Layer & l = m.layers[li];
    next.resize(l.out);
    kernels::active().affine_forward(l.w.data(), l.b.data(), cur.data(), l.out, l.in, next.data());
    if (trace != nullptr) {
      trace->pre[li] = next;
    }
    switch (l.act) {
      case Activation::identity:
        break;
      case Activation::relu:
        for (double & v : next) {
          v = std::max(0.0, v);
        }
        break;
      case Activation::logistic:
        for (double & v : next) {
          v = stable_logistic(v);
        }
        break;
    }
    if (trace != nullptr) {
      trace->post[li] = next;
    }
    cur = next;
  }
  return cur;
}

MlpGrads make_zero_grads(const Mlp & m)
{
  MlpGrads g;
  g.dw.reserve(m.layers.size());
  g.db.reserve(m.layers.size());
  for (const auto & l : m.layers) {
    g.dw.emplace_back(l.w.size(), 0.0);
    g.db.emplace_back(l.b.size(), 0.0);
  }
  return g;
}

void mlp_backward(
  const Mlp & m, std::span<const double> x, const ForwardTrace & trace,
  std::span<const double> upstream, MlpGrads & grads)
{
  const std::size_t n_layers = m.layers.size();
  if (trace.pre.size() != n_layers || trace.post.size() != n_layers) {
    throw Error("mlp_backward: trace does not match network");
  }
  if (grads.dw.size() != n_layers || upstream.size() != m.output_size()) {
    throw Error("mlp_backward: shape mismatch");
  }

  std::vector<double> delta(upstream.begin(), upstream.end());
  std::vector<double> prev_delta;
  for (std::size_t li = n_layers; li-- > 0;) {
    const Layer & l = m.layers[li];
    for (std::size_t i = 0; i < l.out; ++i) {
      delta[i] *= activation_derivative(l.act, trace.pre[li][i], trace.post[li][i]);
    }
    const double * input = (li == 0) ? x.data() : trace.post[li - 1].data();
    kernels::active().rank_one_update(grads.dw[li].data(), delta.data(), input, l.out, l.in);
    for (std::size_t i = 0; i < l.out; ++i) {
      grads.db[li][i] += delta[i];
    }
    if (li > 0) {
      prev_delta.resize(l.in);
      kernels::active().matvec_transposed(l.w.data(), delta.data(), l.out, l.in, prev_delta.data());
      delta = prev_delta;
    }
  }
}

AdamState make_adam_state(const Mlp & m)
{
  AdamState s;
  for (const auto & l : m.layers) {
    s.m_w.emplace_back(l.w.size(), 0.0);
    s.v_w.emplace_back(l.w.size(), 0.0);
    s.m_b.emplace_back(l.b.size(), 0.0);
    s.v_b.emplace_back(l.b.size(), 0.0);
  }
  return s;
}

void adam_step(
  Mlp & m, const MlpGrads & grads, AdamState & state, double lr, double beta1, double beta2,
  double eps)
{
  if (grads.dw.size() != m.layers.size() || state.m_w.size() != m.layers.size()) {
    throw Error("adam_step: state does not match network");
  }
  state.step += 1;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
  const auto & ops = kernels::active();
  for (std::size_t li = 0; li < m.layers.size(); ++li) {
    Layer & l = m.layers[li];
    ops.adam_update(
      l.w.data(), state.m_w[li].data(), state.v_w[li].data(), grads.dw[li].data(), l.w.size(), lr,
      beta1, beta2, eps, bc1, bc2);
    ops.adam_update(
      l.b.data(), state.m_b[li].data(), state.v_b[li].data(), grads.db[li].data(), l.b.size(), lr,
      beta1, beta2, eps, bc1, bc2);
  }
}

TwoStageModel make_model(
  Mode mode, const FeatureConfig & features, std::span<const std::size_t> hidden_sizes,
  std::uint64_t seed)
{
  std::vector<std::size_t> hidden(hidden_sizes.begin(), hidden_sizes.end());
  if (hidden.empty()) {
    hidden = {64, 64};
  }

  TwoStageModel m;
  m.mode = mode;
  m.features = features;

  Rng rng(seed);
  std::vector<std::size_t> sizes;
  sizes.push_back(features.history_dim());
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(mode == Mode::base ? 2 : 1);
  m.endpoint = make_mlp(sizes, Activation::identity, rng);

  sizes.clear();
  sizes.push_back(features.proposal_dim());
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(4);
  m.scorer = make_mlp(sizes, Activation::identity, rng);
  return m;
}

void TrainConfig::validate() const
{
  if (batch_size < 1) {
    throw Error("train config: batch_size must be >= 1");
  }
  if (learning_rate <= 0.0 || lr_decay <= 0.0) {
    throw Error("train config: learning_rate and lr_decay must be > 0");
  }
  if (alpha <= 0.0 || beta <= 0.0) {
    throw Error("train config: alpha and beta must be > 0");
  }
  if (ad_threshold <= 0.0 || negative_ratio <= 0.0) {
    throw Error("train config: ad_threshold and negative_ratio must be > 0");
  }
}

LossValue multitask_loss(
  const TwoStageModel & m, std::span<const SceneSample> batch, const TrainConfig & cfg,
  LossGrads * grads)
{
  if (batch.empty()) {
    throw Error("multitask_loss: empty batch");
  }
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  LossValue loss;

  ForwardTrace trace;
  std::vector<double> upstream;
  for (const SceneSample & scene : batch) {
    // Stage-1 term: Euclidean distance between regression and target.
    const auto out = mlp_forward(m.endpoint, scene.endpoint_features, grads ? &trace : nullptr);
    if (out.size() != scene.endpoint_target.size()) {
      throw Error("multitask_loss: endpoint target arity mismatch");
    }
    double norm2 = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double r = out[i] - scene.endpoint_target[i];
      norm2 += r * r;
    }
    const double ep_norm = std::sqrt(norm2);
    loss.endpoint += ep_norm * inv_b;
    if (grads != nullptr && ep_norm > kZeroResidual) {
      upstream.resize(out.size());
      for (std::size_t i = 0; i < out.size(); ++i) {
        upstream[i] = (out[i] - scene.endpoint_target[i]) / ep_norm * inv_b;
      }
      mlp_backward(m.endpoint, scene.endpoint_features, trace, upstream, grads->endpoint);
    }

    // Stage-2 terms over the selected proposals of this scene.
    const std::size_t n = scene.proposals.size();
    if (n == 0) {
      continue;
    }
    std::size_t n_pos = 0;
    for (const auto & s : scene.proposals) {
      n_pos += s.is_positive ? 1 : 0;
    }
    const double denom =
      static_cast<double>(n_pos) + cfg.beta * static_cast<double>(n - n_pos);

    double cls_sum = 0.0;
    double ref_sum = 0.0;
    for (const auto & s : scene.proposals) {
      const auto sout = mlp_forward(m.scorer, s.features, grads ? &trace : nullptr);
      if (sout.size() != 4) {
        throw Error("multitask_loss: scorer must emit 4 outputs");
      }
      const double p_raw = stable_logistic(sout[0]);
      const double p = std::clamp(p_raw, kProbClamp, 1.0 - kProbClamp);
      const double c = s.is_positive ? 1.0 : 0.0;
      cls_sum += -(c * std::log(p) + (1.0 - c) * std::log(1.0 - p));

      const double rx = sout[1] - s.targets.t_x;
      const double ry = sout[2] - s.targets.t_y;
      const double rg = sout[3] - s.targets.t_gamma;
      const double ref_norm = std::sqrt(rx * rx + ry * ry + rg * rg);
      // Negatives enter the refinement term with weight beta (weighted mean
      // with the matching normalizer below).
      const double ref_w = s.is_positive ? 1.0 : cfg.beta;
      ref_sum += ref_w * ref_norm;

      if (grads != nullptr) {
        upstream.assign(4, 0.0);
        // Clamped cross entropy is flat outside the clamp interval.
        if (p_raw > kProbClamp && p_raw < 1.0 - kProbClamp) {
          upstream[0] = (p_raw - c) / static_cast<double>(n) * inv_b;
        }
        if (denom > 0.0 && ref_norm > kZeroResidual) {
          const double coef = cfg.alpha * ref_w / denom * inv_b;
          upstream[1] = coef * rx / ref_norm;
          upstream[2] = coef * ry / ref_norm;
          upstream[3] = coef * rg / ref_norm;
        }
        mlp_backward(m.scorer, s.features, trace, upstream, grads->scorer);
      }
    }
    loss.classification += cls_sum / static_cast<double>(n) * inv_b;
    if (denom > 0.0) {
      loss.refinement += cfg.alpha * ref_sum / denom * inv_b;
    }
  }
  loss.total = loss.endpoint + loss.classification + loss.refinement;
  return loss;
}

SceneSample make_scene_sample(
  const TwoStageModel & m, const TrainingExample & example, const proposal::GridConfig & grid,
  const TrainConfig & cfg, std::uint64_t sample_seed)
{
  validate_trajectory(example.history);
  validate_trajectory(example.gt_full);
  const geo::MapContext * feat_map = m.features.use_map ? example.map.get() : nullptr;
  if (m.features.use_map && feat_map == nullptr) {
    throw Error("model expects map features but the example has no map");
  }

  SceneSample scene;
  scene.endpoint_features = extract_history_features(example.history, feat_map);
  const auto stage1 = mlp_forward(m.endpoint, scene.endpoint_features);

  const EgoFrame frame = ego_frame(example.history);
  const double t_last = example.history.points.back().t;
  const std::vector<double> times = future_times(example.gt_full, t_last);
  const double t_end = times.back();
  const TimedPoint gt_end = example.gt_full.points.back();

  // Proposal generation around the current stage-1 output, plus the grid
  // center each proposal was generated from (feature input).
  std::vector<proposal::Proposal> proposals;
  std::map<std::string, Vec2> line_centers;
  Vec2 base_center{0.0, 0.0};
  if (m.mode == Mode::base) {
    base_center = frame.to_world({stage1[0], stage1[1]});
    proposals = proposal::generate_base_proposals(example.history, base_center, grid, t_end, times);
  } else {
    if (!example.map || example.map->reference_lines.empty()) {
      throw Error("multimodal training requires reference lines");
    }
    const double d_ep = std::max(0.0, stage1[0]);
    proposals = proposal::generate_multimodal_proposals(
      example.history, example.map->reference_lines, d_ep, grid, t_end, times);
    for (const auto & line : example.map->reference_lines) {
      const double s0 =
        proposal::project_to_polyline(frame.origin, line).s + d_ep;
      line_centers[line.id] = proposal::arclength_point(line, s0).point;
    }
  }

  // Stage-1 regression target.
  if (m.mode == Mode::base) {
    const Vec2 ego_gt = frame.to_ego(gt_end.pos());
    scene.endpoint_target = {ego_gt.x, ego_gt.y};
  } else {
    double best = std::numeric_limits<double>::infinity();
    double d_star = 0.0;
    for (const auto & line : example.map->reference_lines) {
      const auto proj_end = proposal::project_to_polyline(gt_end.pos(), line);
      const double d = distance(gt_end.pos(), proposal::arclength_point(line, proj_end.s).point);
      if (d < best) {
        best = d;
        d_star = proj_end.s - proposal::project_to_polyline(frame.origin, line).s;
      }
    }
    scene.endpoint_target = {d_star};
  }

  auto labels = labeling::assign_labels(proposals, example.gt_full, cfg.ad_threshold);
  labeling::sample_negatives(labels, cfg.negative_ratio, sample_seed);

  const curve::CubicCurve gt_curve = curve::fit_cubic(example.gt_full.points);
  const double gt_gamma = curve::gamma_of(gt_curve, example.history.points.back(), gt_end);

  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!labels[i].selected_for_training) {
      continue;
    }
    const auto & p = proposals[i];
    ProposalSample sample;
    sample.is_positive = labels[i].is_positive;
    const Vec2 center = m.mode == Mode::base
                          ? base_center
                          : line_centers.at(p.reference_line_id.value());
    sample.features = extract_proposal_features(example.history, feat_map, p, center);
    const labeling::RefinementTargets world =
      labels[i].targets ? *labels[i].targets
                        : labeling::refinement_targets(p, gt_end.pos(), gt_gamma);
    const Vec2 t_world{world.t_x, world.t_y};
    sample.targets.t_x = frame.axis_x.dot(t_world);
    sample.targets.t_y = frame.axis_y.dot(t_world);
    sample.targets.t_gamma = world.t_gamma;
    scene.proposals.push_back(std::move(sample));
  }
  return scene;
}

namespace
{

geo::MovableArea transform_area(
  const geo::MovableArea & area, const std::function<Vec2(Vec2)> & xf)
{
  geo::MovableArea out;
  for (const auto & poly : area.polygons) {
    geo::Polygon q;
    q.reserve(poly.size());
    for (const Vec2 & v : poly) {
      q.push_back(xf(v));
    }
    out.polygons.push_back(std::move(q));
  }
  return out;
}

// Random rigid transform (optionally reflected) of the whole example,
// including its map. Scene-level geometry stays self-consistent.
TrainingExample augment_example(const TrainingExample & ex, double angle, bool flip)
{
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  const auto xf = [&](Vec2 p) {
    if (flip) {
      p.y = -p.y;
    }
    return Vec2{c * p.x - s * p.y, s * p.x + c * p.y};
  };
  const auto xf_traj = [&](Trajectory t) {
    for (auto & tp : t.points) {
      const Vec2 q = xf(tp.pos());
      tp.x = q.x;
      tp.y = q.y;
    }
    return t;
  };

  TrainingExample out;
  out.history = xf_traj(ex.history);
  out.gt_full = xf_traj(ex.gt_full);
  if (ex.map) {
    geo::MapContext map;
    for (const auto & line : ex.map->reference_lines) {
      std::vector<Vec2> pts;
      pts.reserve(line.polyline.size());
      for (const Vec2 & v : line.polyline) {
        pts.push_back(xf(v));
      }
      map.reference_lines.push_back(proposal::make_reference_line(line.id, std::move(pts)));
    }
    if (ex.map->movable_area) {
      map.movable_area = transform_area(*ex.map->movable_area, xf);
    }
    if (ex.map->drivable_area) {
      map.drivable_area = transform_area(*ex.map->drivable_area, xf);
    }
    out.map = std::make_shared<const geo::MapContext>(std::move(map));
  }
  return out;
}

}  // namespace

std::vector<EpochStats> train(
  std::span<const TrainingExample> dataset, TwoStageModel & m, const proposal::GridConfig & grid,
  const TrainConfig & cfg)
{
  cfg.validate();
  grid.side_count();  // validates the grid configuration up front
  if (dataset.empty()) {
    throw Error("train: empty dataset");
  }

  Rng rng(cfg.seed);
  AdamState endpoint_state = make_adam_state(m.endpoint);
  AdamState scorer_state = make_adam_state(m.scorer);
  double lr = cfg.learning_rate;

  std::vector<std::size_t> order(dataset.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    order[i] = i;
  }

  std::vector<EpochStats> history;
  history.reserve(cfg.epochs);
  std::vector<SceneSample> batch;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {  // Fisher-Yates shuffle
      std::swap(order[i - 1], order[rng.below(i)]);
    }

    EpochStats stats;
    stats.epoch = epoch + 1;  // 1-based in logs
    stats.learning_rate = lr;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      batch.clear();
      for (std::size_t i = start; i < stop; ++i) {
        const TrainingExample & raw = dataset[order[i]];
        const std::uint64_t sample_seed = rng.next_u64();
        if (cfg.augment) {
          const double angle = rng.uniform(0.0, 2.0 * M_PI);
          const bool flip = rng.coin(0.5);
          batch.push_back(
            make_scene_sample(m, augment_example(raw, angle, flip), grid, cfg, sample_seed));
        } else {
          batch.push_back(make_scene_sample(m, raw, grid, cfg, sample_seed));
        }
      }

      LossGrads grads{make_zero_grads(m.endpoint), make_zero_grads(m.scorer)};
      const LossValue loss = multitask_loss(m, batch, cfg, &grads);
      adam_step(m.endpoint, grads.endpoint, endpoint_state, lr);
      adam_step(m.scorer, grads.scorer, scorer_state, lr);

      const double weight = static_cast<double>(batch.size());
      stats.mean_total += loss.total * weight;
      stats.mean_endpoint += loss.endpoint * weight;
      stats.mean_classification += loss.classification * weight;
      stats.mean_refinement += loss.refinement * weight;
      seen += batch.size();
    }
    const double inv = 1.0 / static_cast<double>(seen);
    stats.mean_total *= inv;
    stats.mean_endpoint *= inv;
    stats.mean_classification *= inv;
    stats.mean_refinement *= inv;
    history.push_back(stats);
    lr *= cfg.lr_decay;
  }

  if (cfg.epochs >= 1) {
    m.trained = true;
  }
  return history;
}

std::vector<proposal::Proposal> score_and_refine(
  const TwoStageModel & m, const Trajectory & history,
  std::span<const proposal::Proposal> proposals, const ScoreContext & ctx)
{
  if (!m.trained) {
    throw Error("score_and_refine: model is not trained");
  }
  if (m.features.use_map && ctx.map == nullptr) {
    throw Error("score_and_refine: model expects map features but no map was given");
  }
  const geo::MapContext * map = m.features.use_map ? ctx.map : nullptr;
  const EgoFrame frame = ego_frame(history);

  std::vector<proposal::Proposal> out;
  out.reserve(proposals.size());
  std::vector<double> times;
  for (const auto & p : proposals) {
    const auto feats = extract_proposal_features(history, map, p, ctx.stage1_end);
    const auto pred = mlp_forward(m.scorer, feats);

    curve::ControlGeometry geom;
    geom.current_point = history.points.back();
    geom.end_point = p.end_point + frame.axis_x * pred[1] + frame.axis_y * pred[2];
    geom.t_end = p.curve.t_end;
    geom.gamma = p.gamma + pred[3];

    proposal::Proposal refined;
    refined.end_point = geom.end_point;
    refined.gamma = geom.gamma;
    refined.curve = curve::fit_from_controls(history, geom);
    times.clear();
    for (const auto & fp : p.future_points) {
      times.push_back(fp.t);
    }
    refined.future_points = curve::sample_curve(refined.curve, times);
    refined.score = stable_logistic(pred[0]);
    refined.refined = true;
    refined.reference_line_id = p.reference_line_id;
    out.push_back(std::move(refined));
  }
  return out;
}

namespace
{

json mlp_to_json(const Mlp & m)
{
  json j;
  std::vector<std::size_t> sizes;
  sizes.push_back(m.input_size());
  for (const auto & l : m.layers) {
    sizes.push_back(l.out);
  }
  j["sizes"] = sizes;
  j["output_activation"] = activation_name(m.layers.back().act);
  json weights = json::array();
  json biases = json::array();
  for (const auto & l : m.layers) {
    weights.push_back(l.w);
    biases.push_back(l.b);
  }
  j["weights"] = std::move(weights);
  j["biases"] = std::move(biases);
  return j;
}

Mlp mlp_from_json(const json & j)
{
  const auto sizes = j.at("sizes").get<std::vector<std::size_t>>();
  if (sizes.size() < 2) {
    throw Error("checkpoint: network needs at least 2 layer sizes");
  }
  const Activation out_act = activation_from_name(j.at("output_activation").get<std::string>());
  const auto & weights = j.at("weights");
  const auto & biases = j.at("biases");
  if (weights.size() != sizes.size() - 1 || biases.size() != sizes.size() - 1) {
    throw Error("checkpoint: layer count mismatch");
  }

  Mlp m;
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
    Layer l;
    l.in = sizes[i];
    l.out = sizes[i + 1];
    l.act = (i + 2 == sizes.size()) ? out_act : Activation::relu;
    l.w = weights.at(i).get<std::vector<double>>();
    l.b = biases.at(i).get<std::vector<double>>();
    if (l.w.size() != l.in * l.out || l.b.size() != l.out) {
      throw Error("checkpoint: parameter tensor shape mismatch");
    }
    for (const double v : l.w) {
      if (!std::isfinite(v)) {
        throw Error("checkpoint: non-finite weight");
      }
    }
    for (const double v : l.b) {
      if (!std::isfinite(v)) {
        throw Error("checkpoint: non-finite bias");
      }
    }
    m.layers.push_back(std::move(l));
  }
  return m;
}

}  // namespace

void save_checkpoint(const std::string & path, const Checkpoint & ckpt)
{
  json j;
  j["format_version"] = kCheckpointFormatVersion;
  j["feature_layout_version"] = kFeatureLayoutVersion;
  j["mode"] = ckpt.model.mode == Mode::base ? "base" : "multimodal";
  j["trained"] = ckpt.model.trained;
  j["features"] = {
    {"history_points", ckpt.model.features.history_points},
    {"future_points", ckpt.model.features.future_points},
    {"use_map", ckpt.model.features.use_map},
  };
  j["horizon"] = {
    {"t_obs", ckpt.horizon.t_obs},
    {"t_pre", ckpt.horizon.t_pre},
    {"dt", ckpt.horizon.dt},
  };
  j["grid"] = {
    {"range_m", ckpt.grid.range_m},
    {"interval_m", ckpt.grid.interval_m},
    {"gammas", ckpt.grid.gammas},
  };
  j["endpoint"] = mlp_to_json(ckpt.model.endpoint);
  j["scorer"] = mlp_to_json(ckpt.model.scorer);

  std::ofstream os(path, std::ios::binary);
  if (!os) {
    throw Error("cannot write checkpoint '" + path + "'");
  }
  os << j.dump(2) << '\n';
  if (!os) {
    throw Error("failed while writing checkpoint '" + path + "'");
  }
}

Checkpoint load_checkpoint(const std::string & path)
{
  std::ifstream is(path, std::ios::binary);
  if (!is) {
    throw Error("cannot read checkpoint '" + path + "'");
  }
  try {
    const json j = json::parse(is);
    if (j.at("format_version").get<int>() != kCheckpointFormatVersion) {
      throw Error("checkpoint: unsupported format version");
    }
    if (j.at("feature_layout_version").get<int>() != kFeatureLayoutVersion) {
      throw Error("checkpoint: unsupported feature layout version");
    }

    Checkpoint ckpt;
    const std::string mode = j.at("mode").get<std::string>();
    if (mode == "base") {
      ckpt.model.mode = Mode::base;
    } else if (mode == "multimodal") {
      ckpt.model.mode = Mode::multimodal;
    } else {
      throw Error("checkpoint: unknown mode '" + mode + "'");
    }
    ckpt.model.trained = j.at("trained").get<bool>();

    const auto & jf = j.at("features");
    ckpt.model.features.history_points = jf.at("history_points").get<std::size_t>();
    ckpt.model.features.future_points = jf.at("future_points").get<std::size_t>();
    ckpt.model.features.use_map = jf.at("use_map").get<bool>();

    const auto & jh = j.at("horizon");
    ckpt.horizon.t_obs = jh.at("t_obs").get<double>();
    ckpt.horizon.t_pre = jh.at("t_pre").get<double>();
    ckpt.horizon.dt = jh.at("dt").get<double>();

    const auto & jg = j.at("grid");
    ckpt.grid.range_m = jg.at("range_m").get<double>();
    ckpt.grid.interval_m = jg.at("interval_m").get<double>();
    ckpt.grid.gammas = jg.at("gammas").get<std::vector<double>>();
    ckpt.grid.side_count();  // validates

    ckpt.model.endpoint = mlp_from_json(j.at("endpoint"));
    ckpt.model.scorer = mlp_from_json(j.at("scorer"));

    if (ckpt.model.endpoint.input_size() != ckpt.model.features.history_dim()) {
      throw Error("checkpoint: endpoint network does not match feature layout");
    }
    if (ckpt.model.scorer.input_size() != ckpt.model.features.proposal_dim()) {
      throw Error("checkpoint: scorer network does not match feature layout");
    }
    const std::size_t want_out = ckpt.model.mode == Mode::base ? 2 : 1;
    if (ckpt.model.endpoint.output_size() != want_out || ckpt.model.scorer.output_size() != 4) {
      throw Error("checkpoint: network output arity does not match mode");
    }
    if (
      ckpt.model.features.history_points !=
        static_cast<std::size_t>(ckpt.horizon.history_points()) ||
      ckpt.model.features.future_points !=
        static_cast<std::size_t>(ckpt.horizon.future_points())) {
      throw Error("checkpoint: feature layout does not match horizon");
    }
    return ckpt;
  } catch (const json::exception & e) {
    throw Error(std::string("checkpoint '") + path + "' is malformed: " + e.what());
  }
}

}  // namespace trajprop::model
