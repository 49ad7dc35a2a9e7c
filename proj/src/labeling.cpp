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

#include "trajprop/labeling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "trajprop/curve.hpp"
#include "trajprop/kernels.hpp"
#include "trajprop/rng.hpp"

namespace trajprop::labeling
{
namespace
{

constexpr double kTimeMatchTolerance = 1e-6;  // seconds

static_assert(sizeof(Vec2) == 2 * sizeof(double), "Vec2 must pack as interleaved xy");

// Index of the gt point whose timestamp matches t, or throws.
std::size_t gt_index_at(const Trajectory & gt, double t)
{
  const auto & pts = gt.points;
  const auto it = std::lower_bound(
    pts.begin(), pts.end(), t - kTimeMatchTolerance,
    [](const TimedPoint & p, double value) { return p.t < value; });
  if (it == pts.end() || std::abs(it->t - t) > kTimeMatchTolerance) {
    throw Error("ground truth does not cover a required timestamp");
  }
  return static_cast<std::size_t>(it - pts.begin());
}

}  // namespace

double average_displacement(std::span<const Vec2> gt_points, std::span<const Vec2> pp_points)
{
  if (gt_points.empty()) {
    throw Error("average_displacement: empty point sequence");
  }
  if (gt_points.size() != pp_points.size()) {
    throw Error("average_displacement: length mismatch");
  }
  return kernels::active().mean_point_distance(
    reinterpret_cast<const double *>(gt_points.data()),
    reinterpret_cast<const double *>(pp_points.data()), gt_points.size());
}

std::vector<ProposalLabel> assign_labels(
  std::span<const proposal::Proposal> proposals, const Trajectory & gt, double ad_threshold)
{
  std::vector<ProposalLabel> labels;
  labels.reserve(proposals.size());
  if (proposals.empty()) {
    return labels;
  }

  const curve::CubicCurve gt_curve = curve::fit_cubic(gt.points);
  std::vector<Vec2> gt_at_times;
  std::vector<Vec2> pp_at_times;

  for (const auto & p : proposals) {
    gt_at_times.clear();
    pp_at_times.clear();
    for (const auto & fp : p.future_points) {
      gt_at_times.push_back(gt.points[gt_index_at(gt, fp.t)].pos());
      pp_at_times.push_back(fp.pos());
    }

    ProposalLabel label;
    label.ad = average_displacement(gt_at_times, pp_at_times);
    label.is_positive = label.ad < ad_threshold;
    if (label.is_positive) {
      const TimedPoint & current = gt.points[gt_index_at(gt, p.curve.t_start)];
      const TimedPoint & gt_end = gt.points[gt_index_at(gt, p.curve.t_end)];
      const double gt_gamma = curve::gamma_of(gt_curve, current, gt_end);
      label.targets = refinement_targets(p, gt_end.pos(), gt_gamma);
    }
    labels.push_back(label);
  }
  return labels;
}

RefinementTargets refinement_targets(
  const proposal::Proposal & p, const Vec2 & gt_end, double gt_gamma)
{
  RefinementTargets t;
  t.t_x = gt_end.x - p.end_point.x;
  t.t_y = gt_end.y - p.end_point.y;
  t.t_gamma = gt_gamma - p.gamma;
  return t;
}

NegativeSampleSummary sample_negatives(
  std::vector<ProposalLabel> & labels, double ratio, std::uint64_t seed)
{
  if (ratio <= 0.0) {
    throw Error("sample_negatives: ratio must be > 0");
  }

  NegativeSampleSummary summary;
  std::vector<std::size_t> negatives;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    labels[i].selected_for_training = labels[i].is_positive;
    if (labels[i].is_positive) {
      ++summary.n_pos;
    } else {
      negatives.push_back(i);
    }
  }
  summary.n_neg_total = negatives.size();
  summary.degenerate = summary.n_pos == 0;

  const std::size_t want = static_cast<std::size_t>(
    std::floor(ratio * static_cast<double>(summary.n_pos)));
  summary.n_neg_selected = std::min(want, negatives.size());

  // Partial Fisher-Yates: only the first n_neg_selected slots are needed.
  Rng rng(seed);
  for (std::size_t i = 0; i < summary.n_neg_selected; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(
      rng.below(static_cast<std::uint64_t>(negatives.size() - i)));
    std::swap(negatives[i], negatives[j]);
    labels[negatives[i]].selected_for_training = true;
  }
  return summary;
}

}  // namespace trajprop::labeling
