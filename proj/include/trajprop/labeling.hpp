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

#ifndef TRAJPROP_LABELING_HPP_
#define TRAJPROP_LABELING_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "trajprop/proposal.hpp"
#include "trajprop/types.hpp"

namespace trajprop::labeling
{

/// Additive corrections taking a proposal's (end point, gamma) to the ground
/// truth's: applied as proposal + target.
struct RefinementTargets
{
  double t_x = 0.0;
  double t_y = 0.0;
  double t_gamma = 0.0;
};

struct ProposalLabel
{
  bool is_positive = false;
  double ad = 0.0;                            // average displacement vs ground truth
  std::optional<RefinementTargets> targets;   // present for every positive
  bool selected_for_training = false;         // set by sample_negatives
};

/// Mean Euclidean distance between time-aligned point sequences.
/// Throws on empty input or length mismatch.
double average_displacement(std::span<const Vec2> gt_points, std::span<const Vec2> pp_points);

/// Labels each proposal positive iff its average displacement against the
/// ground truth at the prediction timestamps is strictly below ad_threshold.
/// `gt` is the agent's full trajectory (observed + future); it must contain a
/// point at the proposal curve's t_start and at every future timestamp
/// (matched within 1e-6 s). Positives carry refinement targets computed
/// against the ground-truth end point and gamma (via a cubic fit of `gt`).
std::vector<ProposalLabel> assign_labels(
  std::span<const proposal::Proposal> proposals, const Trajectory & gt, double ad_threshold);

/// (x_gt - x_pp, y_gt - y_pp, gamma_gt - gamma_pp).
RefinementTargets refinement_targets(
  const proposal::Proposal & p, const Vec2 & gt_end, double gt_gamma);

struct NegativeSampleSummary
{
  std::size_t n_pos = 0;
  std::size_t n_neg_total = 0;
  std::size_t n_neg_selected = 0;
  bool degenerate = false;  // no positives: nothing useful to train on
};

/// Marks every positive selected_for_training and a uniform without-replacement
/// sample of min(floor(ratio * n_pos), n_neg) negatives. Deterministic for a
/// fixed seed. Throws unless ratio > 0.
NegativeSampleSummary sample_negatives(
  std::vector<ProposalLabel> & labels, double ratio, std::uint64_t seed);

}  // namespace trajprop::labeling

#endif  // TRAJPROP_LABELING_HPP_
