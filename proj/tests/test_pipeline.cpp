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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <doctest.h>

#include "trajprop/dataset_io.hpp"
#include "trajprop/geo.hpp"
#include "trajprop/predict.hpp"
#include "trajprop/run.hpp"
#include "trajprop/svg.hpp"
#include "trajprop/synth.hpp"
#include "trajprop/types.hpp"

using trajprop::Agent;
using trajprop::AgentType;
using trajprop::Error;
using trajprop::Horizon;
using trajprop::Scene;
using trajprop::TimedPoint;
using trajprop::Vec2;
namespace io = trajprop::io;
namespace fs = std::filesystem;

namespace
{

fs::path temp_dir(const char * name)
{
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path & path)
{
  std::ifstream is(path, std::ios::binary);
  REQUIRE(is.good());
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

void spit(const fs::path & path, const std::string & text)
{
  std::ofstream os(path, std::ios::binary);
  os << text;
}

// A tiny two-agent scene at dt 0.4: agent a has 8 + 12 rows, agent b only 8.
std::string small_csv()
{
  std::string text = "scene_id,agent_id,agent_type,frame_index,t_seconds,x_m,y_m\n";
  for (int i = 0; i < 20; ++i) {
    text += "s0,a,vehicle," + std::to_string(i) + "," + std::to_string(0.4 * i) + "," +
            std::to_string(1.5 * i) + ",0.25\n";
  }
  for (int i = 0; i < 8; ++i) {
    text += "s0,b,pedestrian," + std::to_string(i) + "," + std::to_string(0.4 * i) + ",0," +
            std::to_string(0.9 * i) + "\n";
  }
  return text;
}

const Horizon kEthUcy12{3.2, 4.8, 0.4};

}  // namespace

TEST_CASE("load_trajectories splits histories and futures by row count")
{
  const auto dir = temp_dir("trajprop_io_basic");
  spit(dir / "t.csv", small_csv());
  const auto scenes = io::load_trajectories((dir / "t.csv").string(), kEthUcy12);
  REQUIRE(scenes.size() == 1);
  REQUIRE(scenes[0].agents.size() == 2);
  const Agent & a = scenes[0].agents[0];
  CHECK(a.id == "a");
  CHECK(a.type == AgentType::vehicle);
  CHECK(a.history.points.size() == 8);
  CHECK(a.future.points.size() == 12);
  const Agent & b = scenes[0].agents[1];
  CHECK(b.type == AgentType::pedestrian);
  CHECK(b.history.points.size() == 8);
  CHECK(b.future.points.empty());
  fs::remove_all(dir);
}

TEST_CASE("trajectory parse errors name the offending line")
{
  const auto dir = temp_dir("trajprop_io_errors");
  const auto path = dir / "t.csv";
  const std::string header = "scene_id,agent_id,agent_type,frame_index,t_seconds,x_m,y_m\n";

  spit(path, "wrong,header\n");
  CHECK_THROWS_WITH_AS(
    io::load_trajectories(path.string(), kEthUcy12), doctest::Contains(":1:"), Error);

  spit(path, header + "s0,a,vehicle,0,0.0,1.0\n");  // 6 fields
  CHECK_THROWS_WITH_AS(
    io::load_trajectories(path.string(), kEthUcy12), doctest::Contains(":2:"), Error);

  spit(path, header + "s0,a,robot,0,0.0,1.0,1.0\n");  // unknown type
  CHECK_THROWS_AS(io::load_trajectories(path.string(), kEthUcy12), Error);

  // Duplicate frame.
  spit(path, header + "s0,a,vehicle,0,0.0,0,0\ns0,a,vehicle,0,0.0,1,0\n");
  CHECK_THROWS_WITH_AS(
    io::load_trajectories(path.string(), kEthUcy12), doctest::Contains(":3:"), Error);

  // Out-of-order frames are an error, not silently sorted.
  spit(path, header + "s0,a,vehicle,1,0.4,0,0\ns0,a,vehicle,0,0.0,1,0\n");
  CHECK_THROWS_WITH_AS(
    io::load_trajectories(path.string(), kEthUcy12), doctest::Contains(":3:"), Error);

  // Row count matching neither n_obs nor n_obs + n_pre.
  std::string five_rows = header;
  for (int i = 0; i < 5; ++i) {
    five_rows += "s0,a,vehicle," + std::to_string(i) + "," + std::to_string(0.4 * i) + ",0,0\n";
  }
  CHECK_THROWS_AS(io::load_trajectories(path.string(), kEthUcy12), Error);

  // Non-uniform dt against the horizon.
  std::string bad_dt = header;
  for (int i = 0; i < 8; ++i) {
    bad_dt += "s0,a,vehicle," + std::to_string(i) + "," + std::to_string(0.5 * i) + ",0,0\n";
  }
  spit(path, bad_dt);
  CHECK_THROWS_AS(io::load_trajectories(path.string(), kEthUcy12), Error);

  fs::remove_all(dir);
}

TEST_CASE("trajectory save/load round-trips exactly")
{
  const auto dir = temp_dir("trajprop_io_roundtrip");
  spit(dir / "t.csv", small_csv());
  const auto scenes = io::load_trajectories((dir / "t.csv").string(), kEthUcy12);
  io::save_trajectories((dir / "u.csv").string(), scenes);
  const auto again = io::load_trajectories((dir / "u.csv").string(), kEthUcy12);
  REQUIRE(again.size() == scenes.size());
  for (std::size_t s = 0; s < scenes.size(); ++s) {
    REQUIRE(again[s].agents.size() == scenes[s].agents.size());
    for (std::size_t a = 0; a < scenes[s].agents.size(); ++a) {
      const Agent & x = scenes[s].agents[a];
      const Agent & y = again[s].agents[a];
      CHECK(x.id == y.id);
      CHECK(x.type == y.type);
      REQUIRE(x.history.points.size() == y.history.points.size());
      for (std::size_t i = 0; i < x.history.points.size(); ++i) {
        CHECK(x.history.points[i].x == y.history.points[i].x);
        CHECK(x.history.points[i].y == y.history.points[i].y);
        CHECK(x.history.points[i].t == y.history.points[i].t);
      }
    }
  }
  // Second save is byte-identical.
  io::save_trajectories((dir / "v.csv").string(), again);
  CHECK(slurp(dir / "u.csv") == slurp(dir / "v.csv"));
  fs::remove_all(dir);
}

TEST_CASE("map json round-trips and validates")
{
  const auto dir = temp_dir("trajprop_io_map");
  const auto path = dir / "m.json";
  spit(path, R"({"reference_lines": [{"id": "l0", "points": [[0,0],[10,0]]},
    {"id": "l1", "points": [[0,2],[10,2],[20,4]]}],
    "drivable_area": [[[0,-5],[20,-5],[20,5],[0,5]]]})");
  const auto map = io::load_map(path.string());
  REQUIRE(map.reference_lines.size() == 2);
  CHECK(map.reference_lines[1].id == "l1");
  CHECK(map.reference_lines[1].arc_lengths.size() == 3);
  CHECK_FALSE(map.movable_area.has_value());
  REQUIRE(map.drivable_area.has_value());
  CHECK(map.drivable_area->polygons.size() == 1);

  io::save_map((dir / "m2.json").string(), map);
  const auto again = io::load_map((dir / "m2.json").string());
  CHECK(again.reference_lines.size() == 2);
  CHECK(again.reference_lines[0].polyline[1].x == 10.0);
  io::save_map((dir / "m3.json").string(), again);
  CHECK(slurp(dir / "m2.json") == slurp(dir / "m3.json"));

  // Degenerate polygon.
  spit(path, R"({"reference_lines": [], "drivable_area": [[[0,0],[1,1]]]})");
  CHECK_THROWS_AS(io::load_map(path.string()), Error);
  // Duplicate line ids.
  spit(path, R"({"reference_lines": [{"id": "l", "points": [[0,0],[1,0]]},
    {"id": "l", "points": [[0,1],[1,1]]}]})");
  CHECK_THROWS_AS(io::load_map(path.string()), Error);
  fs::remove_all(dir);
}

TEST_CASE("synth datasets are deterministic and respect their construction")
{
  trajprop::synth::SynthSpec spec;
  spec.scenes = 40;
  spec.seed = 7;
  const auto scenes1 = trajprop::synth::synth_dataset(spec);
  const auto scenes2 = trajprop::synth::synth_dataset(spec);
  REQUIRE(scenes1.size() == 40);

  const auto dir1 = temp_dir("trajprop_synth_1");
  const auto dir2 = temp_dir("trajprop_synth_2");
  io::save_dataset(dir1.string(), scenes1);
  io::save_dataset(dir2.string(), scenes2);
  CHECK(slurp(dir1 / "trajectories.csv") == slurp(dir2 / "trajectories.csv"));
  CHECK(slurp(dir1 / "maps.json") == slurp(dir2 / "maps.json"));

  // Round trip through the dataset directory.
  const auto loaded = io::load_dataset(dir1.string(), spec.horizon);
  REQUIRE(loaded.size() == scenes1.size());
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    CHECK(loaded[i].id == scenes1[i].id);
    CHECK(loaded[i].map.has_value() == scenes1[i].map.has_value());
  }
  fs::remove_all(dir1);
  fs::remove_all(dir2);
}

TEST_CASE("constant-velocity futures extrapolate the history line")
{
  trajprop::synth::SynthSpec spec;
  spec.scenes = 30;
  spec.seed = 3;
  spec.w_constant_acceleration = 0.0;
  spec.w_lane_following = 0.0;
  spec.w_intersection = 0.0;
  const auto scenes = trajprop::synth::synth_dataset(spec);
  for (const Scene & scene : scenes) {
    for (const Agent & agent : scene.agents) {
      REQUIRE(agent.history.points.size() >= 2);
      const TimedPoint & p0 = agent.history.points[0];
      const TimedPoint & p1 = agent.history.points[1];
      const double dt = p1.t - p0.t;
      const Vec2 v{(p1.x - p0.x) / dt, (p1.y - p0.y) / dt};
      for (const TimedPoint & f : agent.future.points) {
        CHECK(std::abs(f.x - (p0.x + v.x * (f.t - p0.t))) < 1e-9);
        CHECK(std::abs(f.y - (p0.y + v.y * (f.t - p0.t))) < 1e-9);
      }
    }
  }
}

TEST_CASE("intersection futures stay inside the drivable area")
{
  trajprop::synth::SynthSpec spec;
  spec.scenes = 25;
  spec.seed = 11;
  spec.w_constant_velocity = 0.0;
  spec.w_constant_acceleration = 0.0;
  spec.w_lane_following = 0.0;
  const auto scenes = trajprop::synth::synth_dataset(spec);
  for (const Scene & scene : scenes) {
    REQUIRE(scene.map.has_value());
    REQUIRE(scene.map->drivable_area.has_value());
    CHECK(scene.map->reference_lines.size() >= 2);
    CHECK(scene.map->reference_lines.size() <= 3);
    for (const Agent & agent : scene.agents) {
      for (const TimedPoint & f : agent.future.points) {
        CHECK(trajprop::geo::point_in_area(f.pos(), *scene.map->drivable_area));
      }
    }
  }
}

TEST_CASE("config parsing: defaults, overrides, strictness")
{
  const auto defaults = trajprop::run::parse_config("{}", "inline");
  CHECK(defaults.train.batch_size == 128);
  CHECK(defaults.train.epochs == 50);
  CHECK(defaults.train.ad_threshold == 3.0);
  CHECK(defaults.train.negative_ratio == 3.0);
  CHECK(defaults.grid.range_m == 6.0);
  CHECK(defaults.grid.interval_m == 1.0);
  CHECK(defaults.grid.gammas == std::vector<double>{-2.0, -1.0, 0.0, 1.0, 2.0});
  CHECK(defaults.eval.k == 6);
  CHECK(defaults.eval.sigma == 0.5);
  CHECK(defaults.train.alpha == 1.0);
  CHECK(defaults.train.beta == 1.0);
  CHECK_FALSE(defaults.horizon_explicit);

  const auto cfg = trajprop::run::parse_config(
    R"({"horizon": {"preset": "eth-ucy-12"},
        "train": {"epochs": 3, "batch_size": 16},
        "model": {"mode": "multimodal", "hidden": [32, 16]},
        "eval": {"k": 2, "type_weights": {"vehicle": 0.5, "pedestrian": 0.3, "cyclist": 0.2}}})",
    "inline");
  CHECK(cfg.horizon.t_pre == doctest::Approx(4.8));
  CHECK(cfg.horizon.dt == doctest::Approx(0.4));
  CHECK(cfg.horizon_explicit);
  CHECK(cfg.train.epochs == 3);
  CHECK(cfg.mode == trajprop::model::Mode::multimodal);
  CHECK(cfg.hidden == std::vector<std::size_t>{32, 16});
  CHECK(cfg.eval.k == 2);
  CHECK(cfg.type_weights.at(AgentType::vehicle) == doctest::Approx(0.5));

  CHECK_THROWS_AS(trajprop::run::parse_config(R"({"tarin": {}})", "x"), Error);
  CHECK_THROWS_AS(trajprop::run::parse_config(R"({"train": {"epoch": 3}})", "x"), Error);
  CHECK_THROWS_AS(trajprop::run::parse_config(R"({"train": {"epochs": "many"}})", "x"), Error);
  CHECK_THROWS_AS(
    trajprop::run::parse_config(R"({"horizon": {"preset": "eth-ucy-12", "dt": 0.5}})", "x"),
    Error);
  CHECK_THROWS_AS(trajprop::run::parse_config(R"({"horizon": {"preset": "waymo"}})", "x"), Error);
  CHECK_THROWS_AS(trajprop::run::parse_config("[1,2]", "x"), Error);
}

TEST_CASE("horizon presets")
{
  const Horizon h8 = trajprop::run::horizon_preset("eth-ucy-8");
  CHECK(h8.history_points() == 8);
  CHECK(h8.future_points() == 8);
  CHECK(h8.dt == doctest::Approx(0.4));
  const Horizon h12 = trajprop::run::horizon_preset("eth-ucy-12");
  CHECK(h12.future_points() == 12);
  const Horizon ha = trajprop::run::horizon_preset("apolloscape");
  CHECK(ha.history_points() == 6);
  CHECK(ha.future_points() == 6);
  CHECK(ha.dt == doctest::Approx(0.5));
  const Horizon hv = trajprop::run::horizon_preset("argoverse");
  CHECK(hv.history_points() == 20);
  CHECK(hv.future_points() == 30);
  CHECK_THROWS_AS(trajprop::run::horizon_preset("nuscenes"), Error);
}

TEST_CASE("train + eval + predict + plot round trip on a small synthetic set")
{
  const auto dir = temp_dir("trajprop_e2e");
  trajprop::synth::SynthSpec spec;
  spec.scenes = 12;
  spec.seed = 5;
  const auto scenes = trajprop::synth::synth_dataset(spec);
  io::save_dataset((dir / "data").string(), scenes);

  trajprop::run::Config cfg;
  cfg.dataset_dir = (dir / "data").string();
  cfg.checkpoint_path = (dir / "model.json").string();
  cfg.out_dir = (dir / "out").string();
  cfg.horizon = spec.horizon;
  cfg.grid.range_m = 2.0;
  cfg.grid.interval_m = 1.0;
  cfg.grid.gammas = {-1.0, 0.0, 1.0};
  cfg.hidden = {16};
  cfg.train.batch_size = 8;
  cfg.train.epochs = 2;
  cfg.eval.k = 3;

  const auto trained = trajprop::run::run_train(cfg);
  CHECK(trained.epochs.size() == 2);
  CHECK(fs::exists(dir / "model.json"));
  CHECK(fs::exists(dir / "out" / "train_log.json"));

  // Re-training with the same config gives a byte-identical checkpoint.
  trajprop::run::Config cfg2 = cfg;
  cfg2.checkpoint_path = (dir / "model2.json").string();
  trajprop::run::run_train(cfg2);
  CHECK(slurp(dir / "model.json") == slurp(dir / "model2.json"));

  const auto eval1 = trajprop::run::run_eval(cfg);
  CHECK(fs::exists(dir / "out" / "report.json"));
  CHECK(fs::exists(dir / "out" / "per_agent.csv"));
  CHECK(eval1.report.agent_count > 0);
  CHECK(eval1.report.min_ade <= eval1.report.ade + 1e-12);
  CHECK(eval1.report.min_fde <= eval1.report.fde + 1e-12);
  REQUIRE(eval1.report.dac.has_value());
  CHECK(*eval1.report.dac >= 0.0);
  CHECK(*eval1.report.dac <= 1.0);
  const auto eval2 = trajprop::run::run_eval(cfg);
  CHECK(eval1.report_json == eval2.report_json);
  CHECK(eval1.per_agent_csv == eval2.per_agent_csv);

  // Horizon mismatch between config and checkpoint.
  trajprop::run::Config bad = cfg;
  bad.horizon = trajprop::run::horizon_preset("argoverse");
  bad.horizon_explicit = true;
  CHECK_THROWS_AS(trajprop::run::run_eval(bad), Error);

  // Prediction shape contract and ranking invariants.
  const auto ckpt = trajprop::model::load_checkpoint(cfg.checkpoint_path);
  const auto loaded = io::load_dataset(cfg.dataset_dir, ckpt.horizon);
  std::vector<trajprop::predict::PredictionSet> sets;
  for (const auto & scene : loaded) {
    for (const auto & set : trajprop::predict::predict_scene(ckpt, scene, cfg.eval)) {
      REQUIRE(set.predictions.size() >= 1);
      CHECK(set.predictions.size() <= cfg.eval.k);
      for (std::size_t i = 0; i < set.predictions.size(); ++i) {
        const auto & rp = set.predictions[i];
        CHECK(rp.points.size() == static_cast<std::size_t>(ckpt.horizon.future_points()));
        if (i > 0) {
          CHECK(set.predictions[i - 1].score >= rp.score);
        }
      }
      sets.push_back(set);
    }
  }
  const auto json1 = trajprop::run::predictions_json(sets);
  const auto json2 = trajprop::run::predictions_json(sets);
  CHECK(json1 == json2);
  CHECK(json1.find("\"scene_id\"") != std::string::npos);

  // SVG rendering: byte-determinism and one polyline per drawn trajectory.
  const Scene & scene0 = loaded.front();
  const auto set0 = trajprop::predict::predict_scene(ckpt, scene0, cfg.eval).front();
  const auto svg1 = trajprop::svg::render_svg(scene0, set0);
  const auto svg2 = trajprop::svg::render_svg(scene0, set0);
  CHECK(svg1 == svg2);
  std::size_t polylines = 0;
  for (std::size_t pos = svg1.find("<polyline"); pos != std::string::npos;
       pos = svg1.find("<polyline", pos + 1)) {
    ++polylines;
  }
  std::size_t expected = set0.predictions.size();
  for (const Agent & agent : scene0.agents) {
    expected += 1;  // history
    if (agent.id == set0.agent_id && !agent.future.points.empty()) {
      expected += 1;  // ground truth
    }
  }
  if (scene0.map) {
    expected += scene0.map->reference_lines.size();
  }
  CHECK(polylines == expected);

  fs::remove_all(dir);
}

TEST_CASE("run_train validates inputs before training")
{
  trajprop::run::Config cfg;
  cfg.checkpoint_path = "/tmp/never_written.json";
  CHECK_THROWS_AS(trajprop::run::run_train(cfg), Error);  // no dataset path

  cfg.dataset_dir = "/path/that/does/not/exist";
  CHECK_THROWS_AS(trajprop::run::run_train(cfg), Error);

  // A dataset whose only agents lack futures.
  const auto dir = temp_dir("trajprop_no_futures");
  std::string text = "scene_id,agent_id,agent_type,frame_index,t_seconds,x_m,y_m\n";
  for (int i = 0; i < 6; ++i) {
    text += "s0,a,vehicle," + std::to_string(i) + "," + std::to_string(0.5 * i) + ",0,0\n";
  }
  fs::create_directories(dir);
  spit(dir / "trajectories.csv", text);
  cfg.dataset_dir = dir.string();
  cfg.horizon = {3.0, 3.0, 0.5};
  CHECK_THROWS_AS(trajprop::run::run_train(cfg), Error);
  fs::remove_all(dir);
}
