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

#include "trajprop/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <utility>

#include "trajprop/proposal.hpp"
#include "trajprop/rng.hpp"

namespace trajprop::synth
{
namespace
{

struct SceneDims
{
  long n_obs = 0;
  long n_pre = 0;
  long total() const { return n_obs + n_pre; }
};

Vec2 rotate(const Vec2 & p, double c, double s) { return {c * p.x - s * p.y, s * p.x + c * p.y}; }

// Corridor polygon of half-width w around a polyline: left offsets forward,
// right offsets backward. Vertex normals average the adjacent segment
// normals, so gentle curves stay simple (non-self-intersecting).
geo::Polygon corridor(const std::vector<Vec2> & line, double w)
{
  const std::size_t n = line.size();
  std::vector<Vec2> normals(n);
  for (std::size_t i = 0; i < n; ++i) {
    Vec2 dir{0.0, 0.0};
    if (i > 0) {
      dir = dir + (line[i] - line[i - 1]).normalized();
    }
    if (i + 1 < n) {
      dir = dir + (line[i + 1] - line[i]).normalized();
    }
    normals[i] = dir.normalized().left_normal();
  }
  geo::Polygon poly;
  poly.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    poly.push_back(line[i] + normals[i] * w);
  }
  for (std::size_t i = n; i-- > 0;) {
    poly.push_back(line[i] - normals[i] * w);
  }
  return poly;
}

AgentType draw_type(Rng & rng)
{
  const double u = rng.uniform();
  if (u < 0.6) {
    return AgentType::vehicle;
  }
  return u < 0.8 ? AgentType::pedestrian : AgentType::cyclist;
}

double speed_for(AgentType type, Rng & rng)
{
  switch (type) {
    case AgentType::vehicle:
      return rng.uniform(3.0, 12.0);
    case AgentType::pedestrian:
      return rng.uniform(0.6, 2.0);
    case AgentType::cyclist:
      return rng.uniform(2.0, 6.0);
  }
  throw Error("unknown agent type value");
}

Agent make_agent(
  AgentType type, const std::vector<Vec2> & positions, const SceneDims & dims, double dt,
  const Horizon & horizon)
{
  Agent agent;
  agent.id = "agent_0";
  agent.type = type;
  agent.history.horizon = horizon;
  agent.future.horizon = horizon;
  for (long k = 0; k < dims.total(); ++k) {
    TimedPoint tp;
    tp.t = static_cast<double>(k) * dt;
    tp.x = positions[static_cast<std::size_t>(k)].x;
    tp.y = positions[static_cast<std::size_t>(k)].y;
    (k < dims.n_obs ? agent.history : agent.future).points.push_back(tp);
  }
  return agent;
}

std::vector<Vec2> straight_line_positions(
  const Vec2 & start, const Vec2 & dir, double v, double accel, const SceneDims & dims, double dt)
{
  std::vector<Vec2> out;
  out.reserve(dims.total());
  for (long k = 0; k < dims.total(); ++k) {
    const double t = static_cast<double>(k) * dt;
    out.push_back(start + dir * (v * t + 0.5 * accel * t * t));
  }
  return out;
}

// Positions sampled by arc length along a reference line.
std::vector<Vec2> line_walk_positions(
  const proposal::ReferenceLine & line, double s_start, double v, const SceneDims & dims,
  double dt)
{
  std::vector<Vec2> out;
  out.reserve(dims.total());
  for (long k = 0; k < dims.total(); ++k) {
    const double s = s_start + v * static_cast<double>(k) * dt;
    out.push_back(proposal::arclength_point(line, s).point);
  }
  return out;
}

Scene constant_velocity_scene(Rng & rng, const SceneDims & dims, const Horizon & horizon)
{
  const AgentType type = draw_type(rng);
  const double v = speed_for(type, rng);
  const double theta = rng.uniform(0.0, 2.0 * M_PI);
  const Vec2 start{rng.uniform(-100.0, 100.0), rng.uniform(-100.0, 100.0)};
  const Vec2 dir{std::cos(theta), std::sin(theta)};

  Scene scene;
  scene.agents.push_back(make_agent(
    type, straight_line_positions(start, dir, v, 0.0, dims, horizon.dt), dims, horizon.dt,
    horizon));
  return scene;
}

Scene constant_acceleration_scene(Rng & rng, const SceneDims & dims, const Horizon & horizon)
{
  const AgentType type = draw_type(rng);
  const double v = speed_for(type, rng);
  const double theta = rng.uniform(0.0, 2.0 * M_PI);
  const Vec2 start{rng.uniform(-100.0, 100.0), rng.uniform(-100.0, 100.0)};
  const Vec2 dir{std::cos(theta), std::sin(theta)};
  const double t_total = static_cast<double>(dims.total() - 1) * horizon.dt;
  // Keep the speed above 0.3 m/s over the whole window.
  const double a = std::max(rng.uniform(-1.5, 1.5), (0.3 - v) / t_total);

  Scene scene;
  scene.agents.push_back(make_agent(
    type, straight_line_positions(start, dir, v, a, dims, horizon.dt), dims, horizon.dt,
    horizon));
  return scene;
}

Scene lane_following_scene(Rng & rng, const SceneDims & dims, const Horizon & horizon)
{
  const double v = rng.uniform(4.0, 10.0);
  const double theta0 = rng.uniform(0.0, 2.0 * M_PI);
  const Vec2 start{rng.uniform(-100.0, 100.0), rng.uniform(-100.0, 100.0)};
  const double kappa = rng.uniform(-0.04, 0.04);  // heading change per meter

  const double lead_in = 10.0;
  const double t_total = static_cast<double>(dims.total() - 1) * horizon.dt;
  const double length = lead_in + v * t_total + 30.0;
  const double step = 2.0;

  std::vector<Vec2> pts;
  Vec2 p = start - Vec2{std::cos(theta0), std::sin(theta0)} * lead_in;
  double heading = theta0;
  pts.push_back(p);
  for (double s = 0.0; s < length; s += step) {
    p = p + Vec2{std::cos(heading), std::sin(heading)} * step;
    heading += kappa * step;
    pts.push_back(p);
  }
  auto lane = proposal::make_reference_line("lane", pts);

  Scene scene;
  scene.agents.push_back(make_agent(
    AgentType::vehicle, line_walk_positions(lane, lead_in, v, dims, horizon.dt), dims, horizon.dt,
    horizon));
  geo::MapContext map;
  map.movable_area = geo::MovableArea{{corridor(pts, 3.2)}};
  map.drivable_area = geo::MovableArea{{corridor(pts, 4.0)}};
  map.reference_lines.push_back(std::move(lane));
  scene.map = std::move(map);
  return scene;
}

Scene intersection_scene(Rng & rng, const SceneDims & dims, const Horizon & horizon)
{
  const Vec2 center{rng.uniform(-50.0, 50.0), rng.uniform(-50.0, 50.0)};
  const double theta = rng.uniform(0.0, 2.0 * M_PI);
  const double v = rng.uniform(4.0, 9.0);
  const double radius = rng.uniform(7.0, 12.0);
  const std::uint64_t line_pick = rng.below(4);  // 0: all three, else a pair
  const double t_obs = static_cast<double>(dims.n_obs - 1) * horizon.dt;
  const double t_total = static_cast<double>(dims.total() - 1) * horizon.dt;
  // The agent crosses the intersection strictly after the observed window.
  const double t_cross = t_obs + (t_total - t_obs) * rng.uniform(0.3, 0.55);

  const double approach = 80.0;
  const double exit_len = 80.0;
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const auto to_world = [&](const Vec2 & local) { return center + rotate(local, c, s); };

  const auto build_line = [&](const char * id, int turn) {  // -1 right, 0 straight, +1 left
    std::vector<Vec2> pts;
    pts.push_back(to_world({-approach, 0.0}));
    if (turn == 0) {
      pts.push_back(to_world({exit_len, 0.0}));
    } else {
      const double sign = turn > 0 ? 1.0 : -1.0;
      const int arc_steps = 10;
      for (int i = 0; i <= arc_steps; ++i) {
        const double psi = M_PI / 2.0 * static_cast<double>(i) / arc_steps;
        pts.push_back(
          to_world({radius * std::sin(psi), sign * radius * (1.0 - std::cos(psi))}));
      }
      pts.push_back(to_world({radius, sign * (radius + exit_len)}));
    }
    return proposal::make_reference_line(id, std::move(pts));
  };

  std::vector<proposal::ReferenceLine> lines;
  if (line_pick == 0) {
    lines.push_back(build_line("straight", 0));
    lines.push_back(build_line("left", 1));
    lines.push_back(build_line("right", -1));
  } else if (line_pick == 1) {
    lines.push_back(build_line("left", 1));
    lines.push_back(build_line("right", -1));
  } else if (line_pick == 2) {
    lines.push_back(build_line("straight", 0));
    lines.push_back(build_line("left", 1));
  } else {
    lines.push_back(build_line("straight", 0));
    lines.push_back(build_line("right", -1));
  }
  const std::size_t intention = rng.below(lines.size());

  const double s_start = approach - v * t_cross;

  Scene scene;
  scene.agents.push_back(make_agent(
    AgentType::vehicle, line_walk_positions(lines[intention], s_start, v, dims, horizon.dt), dims,
    horizon.dt, horizon));

  geo::MovableArea movable;
  geo::MovableArea drivable;
  for (const auto & line : lines) {
    movable.polygons.push_back(corridor(line.polyline, 3.2));
    drivable.polygons.push_back(corridor(line.polyline, 4.0));
  }
  geo::MapContext map;
  map.reference_lines = std::move(lines);
  map.movable_area = std::move(movable);
  map.drivable_area = std::move(drivable);
  scene.map = std::move(map);
  return scene;
}

}  // namespace

void SynthSpec::validate() const
{
  if (scenes < 1) {
    throw Error("synth spec: need at least 1 scene");
  }
  if (noise_std < 0.0) {
    throw Error("synth spec: noise_std must be >= 0");
  }
  if (
    w_constant_velocity < 0.0 || w_constant_acceleration < 0.0 || w_lane_following < 0.0 ||
    w_intersection < 0.0) {
    throw Error("synth spec: family weights must be >= 0");
  }
  if (w_constant_velocity + w_constant_acceleration + w_lane_following + w_intersection <= 0.0) {
    throw Error("synth spec: at least one family weight must be > 0");
  }
  if (horizon.dt <= 0.0 || horizon.history_points() < 2 || horizon.future_points() < 1) {
    throw Error("synth spec: horizon needs >= 2 observed and >= 1 future points");
  }
}

std::vector<Scene> synth_dataset(const SynthSpec & spec)
{
  spec.validate();
  Rng rng(spec.seed);
  SceneDims dims{spec.horizon.history_points(), spec.horizon.future_points()};

  const double w_cv = spec.w_constant_velocity;
  const double w_ca = w_cv + spec.w_constant_acceleration;
  const double w_lane = w_ca + spec.w_lane_following;
  const double w_all = w_lane + spec.w_intersection;

  std::vector<Scene> scenes;
  scenes.reserve(spec.scenes);
  for (std::size_t i = 0; i < spec.scenes; ++i) {
    const double pick = rng.uniform(0.0, w_all);
    Scene scene;
    if (pick < w_cv) {
      scene = constant_velocity_scene(rng, dims, spec.horizon);
    } else if (pick < w_ca) {
      scene = constant_acceleration_scene(rng, dims, spec.horizon);
    } else if (pick < w_lane) {
      scene = lane_following_scene(rng, dims, spec.horizon);
    } else {
      scene = intersection_scene(rng, dims, spec.horizon);
    }

    char id[24];
    std::snprintf(id, sizeof(id), "scene_%06zu", i);
    scene.id = id;

    if (spec.noise_std > 0.0) {
      for (Agent & agent : scene.agents) {
        for (auto * traj : {&agent.history, &agent.future}) {
          for (TimedPoint & tp : traj->points) {
            tp.x += rng.normal(0.0, spec.noise_std);
            tp.y += rng.normal(0.0, spec.noise_std);
          }
        }
      }
    }
    scenes.push_back(std::move(scene));
  }
  return scenes;
}

}  // namespace trajprop::synth
