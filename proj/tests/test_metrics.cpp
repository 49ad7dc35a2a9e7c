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

#include "trajprop/metrics.hpp"

#include <cmath>
#include <map>
#include <vector>

#include <doctest.h>

#include "trajprop/rng.hpp"
#include "trajprop/scene.hpp"
#include "trajprop/types.hpp"

using trajprop::AgentType;
using trajprop::Error;
using trajprop::Rng;
using trajprop::Vec2;
namespace metrics = trajprop::metrics;

TEST_CASE("ade averages pointwise distances")
{
  // Offsets 1 and 2 along y => mean 1.5.
  const std::vector<Vec2> pred = {{0.0, 1.0}, {1.0, 2.0}};
  const std::vector<Vec2> gt = {{0.0, 0.0}, {1.0, 0.0}};
  CHECK(metrics::ade(pred, gt) == doctest::Approx(1.5));
  CHECK(metrics::ade(gt, gt) == doctest::Approx(0.0));
  CHECK_THROWS_AS(metrics::ade({}, {}), Error);
  const std::vector<Vec2> shorter = {{0.0, 0.0}};
  CHECK_THROWS_AS(metrics::ade(pred, shorter), Error);
}

TEST_CASE("fde is the final-point distance only")
{
  const std::vector<Vec2> pred = {{100.0, 100.0}, {3.0, 4.0}};
  const std::vector<Vec2> gt = {{0.0, 0.0}, {0.0, 0.0}};
  CHECK(metrics::fde(pred, gt) == doctest::Approx(5.0));
}

TEST_CASE("min_ade_fde minimizes each metric independently")
{
  const std::vector<Vec2> gt = {{0.0, 0.0}, {10.0, 0.0}};
  // Candidate A: best ADE (close everywhere, misses the end slightly more
  // than B). Candidate B: terrible first point, exact end point.
  const std::vector<std::vector<Vec2>> preds = {
    {{0.0, 0.5}, {10.0, 0.5}},
    {{0.0, 30.0}, {10.0, 0.0}}};
  const auto mm = metrics::min_ade_fde(preds, gt);
  CHECK(mm.min_ade == doctest::Approx(0.5));   // from A
  CHECK(mm.min_fde == doctest::Approx(0.0));   // from B
  CHECK_THROWS_AS(metrics::min_ade_fde({}, gt), Error);
}

TEST_CASE("min over k candidates never exceeds any single candidate")
{
  Rng rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Vec2> gt;
    for (int i = 0; i < 6; ++i) {
      gt.push_back({rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0)});
    }
    std::vector<std::vector<Vec2>> preds;
    for (int k = 0; k < 6; ++k) {
      std::vector<Vec2> p;
      for (int i = 0; i < 6; ++i) {
        p.push_back({gt[i].x + rng.normal(), gt[i].y + rng.normal()});
      }
      preds.push_back(std::move(p));
    }
    const auto mm = metrics::min_ade_fde(preds, gt);
    CHECK(mm.min_ade <= metrics::ade(preds[0], gt) + 1e-12);
    CHECK(mm.min_fde <= metrics::fde(preds[0], gt) + 1e-12);
    for (const auto & p : preds) {
      CHECK(mm.min_ade <= metrics::ade(p, gt) + 1e-12);
      CHECK(mm.min_fde <= metrics::fde(p, gt) + 1e-12);
    }
  }
}

TEST_CASE("weighted_sum applies per-type weights")
{
  const std::map<AgentType, double> values = {
    {AgentType::vehicle, 4.0}, {AgentType::pedestrian, 1.0}, {AgentType::cyclist, 2.0}};
  const std::map<AgentType, double> weights = {
    {AgentType::vehicle, 0.2}, {AgentType::pedestrian, 0.58}, {AgentType::cyclist, 0.22}};
  CHECK(metrics::weighted_sum(values, weights) ==
    doctest::Approx(0.2 * 4.0 + 0.58 * 1.0 + 0.22 * 2.0));

  std::map<AgentType, double> missing = weights;
  missing.erase(AgentType::cyclist);
  CHECK_THROWS_AS(metrics::weighted_sum(values, missing), Error);

  std::map<AgentType, double> negative = weights;
  negative[AgentType::vehicle] = -0.1;
  CHECK_THROWS_AS(metrics::weighted_sum(values, negative), Error);

  // Extra weights for absent types are allowed.
  std::map<AgentType, double> only_vehicle = {{AgentType::vehicle, 7.0}};
  CHECK(metrics::weighted_sum(only_vehicle, weights) == doctest::Approx(1.4));
}
