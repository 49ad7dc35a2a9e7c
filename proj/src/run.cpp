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

#include "trajprop/run.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "trajprop/dataset_io.hpp"
#include "trajprop/geo.hpp"

namespace trajprop::run
{
namespace
{

using nlohmann::json;

void check_keys(const json & obj, std::initializer_list<const char *> allowed,
  const std::string & where)
{
  for (const auto & item : obj.items()) {
    bool known = false;
    for (const char * key : allowed) {
      if (item.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw Error("config: unknown key '" + item.key() + "' in " + where);
    }
  }
}

double get_double(const json & obj, const char * key, double fallback)
{
  if (!obj.contains(key)) {
    return fallback;
  }
  const json & v = obj.at(key);
  if (!v.is_number()) {
    throw Error(std::string("config: '") + key + "' must be a number");
  }
  return v.get<double>();
}

std::size_t get_size(const json & obj, const char * key, std::size_t fallback)
{
  if (!obj.contains(key)) {
    return fallback;
  }
  const json & v = obj.at(key);
  if (!v.is_number_unsigned()) {
    throw Error(std::string("config: '") + key + "' must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

bool get_bool(const json & obj, const char * key, bool fallback)
{
  if (!obj.contains(key)) {
    return fallback;
  }
  const json & v = obj.at(key);
  if (!v.is_boolean()) {
    throw Error(std::string("config: '") + key + "' must be a boolean");
  }
  return v.get<bool>();
}

std::string get_string(const json & obj, const char * key, const std::string & fallback)
{
  if (!obj.contains(key)) {
    return fallback;
  }
  const json & v = obj.at(key);
  if (!v.is_string()) {
    throw Error(std::string("config: '") + key + "' must be a string");
  }
  return v.get<std::string>();
}

void write_text_file(const std::string & path, const std::string & text)
{
  std::ofstream os(path, std::ios::binary);
  if (!os) {
    throw Error("cannot write '" + path + "'");
  }
  os << text;
  if (!os) {
    throw Error("failed while writing '" + path + "'");
  }
}

json vec2_json(const Vec2 & v) { return json::array({v.x, v.y}); }

struct TypeAccum
{
  double ade = 0.0;
  double fde = 0.0;
  int count = 0;
};

std::vector<Vec2> positions(const std::vector<TimedPoint> & pts)
{
  std::vector<Vec2> out;
  out.reserve(pts.size());
  for (const auto & tp : pts) {
    out.push_back(tp.pos());
  }
  return out;
}

}  // namespace

Horizon horizon_preset(const std::string & name)
{
  if (name == "eth-ucy-8") {
    return {3.2, 3.2, 0.4};
  }
  if (name == "eth-ucy-12") {
    return {3.2, 4.8, 0.4};
  }
  if (name == "apolloscape") {
    return {3.0, 3.0, 0.5};
  }
  if (name == "argoverse") {
    return {2.0, 3.0, 0.1};
  }
  throw Error(
    "unknown horizon preset '" + name +
    "' (expected eth-ucy-8, eth-ucy-12, apolloscape, or argoverse)");
}

Config default_config() { return Config{}; }

Config parse_config(const std::string & text, const std::string & origin)
{
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception & e) {
    throw Error("config '" + origin + "': " + e.what());
  }
  if (!root.is_object()) {
    throw Error("config '" + origin + "': top level must be an object");
  }
  check_keys(root, {"data", "horizon", "grid", "model", "train", "eval"}, "config");

  Config cfg = default_config();

  if (root.contains("data")) {
    const json & data = root.at("data");
    check_keys(data, {"dataset", "checkpoint", "out"}, "data");
    cfg.dataset_dir = get_string(data, "dataset", cfg.dataset_dir);
    cfg.checkpoint_path = get_string(data, "checkpoint", cfg.checkpoint_path);
    cfg.out_dir = get_string(data, "out", cfg.out_dir);
  }

  if (root.contains("horizon")) {
    const json & hor = root.at("horizon");
    check_keys(hor, {"preset", "t_obs", "t_pre", "dt"}, "horizon");
    if (hor.contains("preset")) {
      if (hor.size() > 1) {
        throw Error("config: horizon preset cannot be combined with explicit fields");
      }
      cfg.horizon = horizon_preset(get_string(hor, "preset", ""));
    } else {
      cfg.horizon.t_obs = get_double(hor, "t_obs", cfg.horizon.t_obs);
      cfg.horizon.t_pre = get_double(hor, "t_pre", cfg.horizon.t_pre);
      cfg.horizon.dt = get_double(hor, "dt", cfg.horizon.dt);
    }
    cfg.horizon_explicit = !hor.empty();
  }

  if (root.contains("grid")) {
    const json & grid = root.at("grid");
    check_keys(grid, {"range_m", "interval_m", "gammas"}, "grid");
    cfg.grid.range_m = get_double(grid, "range_m", cfg.grid.range_m);
    cfg.grid.interval_m = get_double(grid, "interval_m", cfg.grid.interval_m);
    if (grid.contains("gammas")) {
      const json & gammas = grid.at("gammas");
      if (!gammas.is_array() || gammas.empty()) {
        throw Error("config: 'gammas' must be a non-empty array of numbers");
      }
      cfg.grid.gammas.clear();
      for (const json & g : gammas) {
        if (!g.is_number()) {
          throw Error("config: 'gammas' must be a non-empty array of numbers");
        }
        cfg.grid.gammas.push_back(g.get<double>());
      }
    }
  }

  if (root.contains("model")) {
    const json & mdl = root.at("model");
    check_keys(mdl, {"mode", "use_map", "hidden", "seed"}, "model");
    const std::string mode = get_string(mdl, "mode", "base");
    if (mode == "base") {
      cfg.mode = model::Mode::base;
    } else if (mode == "multimodal") {
      cfg.mode = model::Mode::multimodal;
    } else {
      throw Error("config: 'mode' must be \"base\" or \"multimodal\"");
    }
    cfg.use_map = get_bool(mdl, "use_map", cfg.use_map);
    if (mdl.contains("hidden")) {
      const json & hidden = mdl.at("hidden");
      if (!hidden.is_array()) {
        throw Error("config: 'hidden' must be an array of positive integers");
      }
      cfg.hidden.clear();
      for (const json & h : hidden) {
        if (!h.is_number_unsigned() || h.get<std::size_t>() == 0) {
          throw Error("config: 'hidden' must be an array of positive integers");
        }
        cfg.hidden.push_back(h.get<std::size_t>());
      }
    }
    cfg.model_seed = get_size(mdl, "seed", cfg.model_seed);
  }

  if (root.contains("train")) {
    const json & tr = root.at("train");
    check_keys(
      tr,
      {"batch_size", "epochs", "learning_rate", "lr_decay", "alpha", "beta", "ad_threshold_m",
       "negative_ratio", "augment", "seed"},
      "train");
    cfg.train.batch_size = get_size(tr, "batch_size", cfg.train.batch_size);
    cfg.train.epochs = get_size(tr, "epochs", cfg.train.epochs);
    cfg.train.learning_rate = get_double(tr, "learning_rate", cfg.train.learning_rate);
    cfg.train.lr_decay = get_double(tr, "lr_decay", cfg.train.lr_decay);
    cfg.train.alpha = get_double(tr, "alpha", cfg.train.alpha);
    cfg.train.beta = get_double(tr, "beta", cfg.train.beta);
    cfg.train.ad_threshold = get_double(tr, "ad_threshold_m", cfg.train.ad_threshold);
    cfg.train.negative_ratio = get_double(tr, "negative_ratio", cfg.train.negative_ratio);
    cfg.train.augment = get_bool(tr, "augment", cfg.train.augment);
    cfg.train.seed = get_size(tr, "seed", cfg.train.seed);
  }

  if (root.contains("eval")) {
    const json & ev = root.at("eval");
    check_keys(
      ev, {"k", "sigma", "use_safety", "no_refine", "no_classify", "type_weights"}, "eval");
    cfg.eval.k = get_size(ev, "k", cfg.eval.k);
    cfg.eval.sigma = get_double(ev, "sigma", cfg.eval.sigma);
    cfg.eval.use_safety = get_bool(ev, "use_safety", cfg.eval.use_safety);
    cfg.eval.no_refine = get_bool(ev, "no_refine", cfg.eval.no_refine);
    cfg.eval.no_classify = get_bool(ev, "no_classify", cfg.eval.no_classify);
    if (ev.contains("type_weights")) {
      const json & weights = ev.at("type_weights");
      if (!weights.is_object()) {
        throw Error("config: 'type_weights' must map agent types to numbers");
      }
      for (const auto & item : weights.items()) {
        if (!item.value().is_number()) {
          throw Error("config: 'type_weights' must map agent types to numbers");
        }
        cfg.type_weights[agent_type_from_string(item.key())] = item.value().get<double>();
      }
    }
  }

  return cfg;
}

Config load_config(const std::string & path)
{
  std::ifstream is(path, std::ios::binary);
  if (!is) {
    throw Error("cannot open config '" + path + "'");
  }
  std::ostringstream buf;
  buf << is.rdbuf();
  return parse_config(buf.str(), path);
}

TrainResult run_train(const Config & cfg)
{
  if (cfg.dataset_dir.empty()) {
    throw Error("train: no dataset configured (data.dataset)");
  }
  if (cfg.checkpoint_path.empty()) {
    throw Error("train: no checkpoint path configured (data.checkpoint)");
  }
  cfg.train.validate();
  (void)cfg.grid.side_count();  // validates range/interval/gammas up front

  const std::vector<Scene> scenes = io::load_dataset(cfg.dataset_dir, cfg.horizon);

  std::vector<model::TrainingExample> examples;
  for (const Scene & scene : scenes) {
    std::shared_ptr<const geo::MapContext> map;
    if (scene.map) {
      map = std::make_shared<const geo::MapContext>(*scene.map);
    }
    for (const Agent & agent : scene.agents) {
      if (agent.future.points.empty()) {
        continue;
      }
      if (cfg.use_map && !map) {
        throw Error("train: model.use_map is set but scene '" + scene.id + "' has no map");
      }
      if (cfg.mode == model::Mode::multimodal && (!map || map->reference_lines.empty())) {
        throw Error(
          "train: multimodal mode needs reference lines, scene '" + scene.id + "' has none");
      }
      model::TrainingExample ex;
      ex.history = agent.history;
      ex.gt_full.points = agent.history.points;
      ex.gt_full.points.insert(
        ex.gt_full.points.end(), agent.future.points.begin(), agent.future.points.end());
      ex.gt_full.horizon = cfg.horizon;
      ex.map = map;
      examples.push_back(std::move(ex));
    }
  }
  if (examples.empty()) {
    throw Error("train: dataset '" + cfg.dataset_dir + "' has no agents with ground-truth futures");
  }

  model::FeatureConfig features;
  features.history_points = static_cast<std::size_t>(cfg.horizon.history_points());
  features.future_points = static_cast<std::size_t>(cfg.horizon.future_points());
  features.use_map = cfg.use_map;

  TrainResult result;
  result.checkpoint.model = model::make_model(cfg.mode, features, cfg.hidden, cfg.model_seed);
  result.checkpoint.horizon = cfg.horizon;
  result.checkpoint.grid = cfg.grid;
  result.epochs = model::train(examples, result.checkpoint.model, cfg.grid, cfg.train);

  namespace fs = std::filesystem;
  const fs::path ckpt_dir = fs::path(cfg.checkpoint_path).parent_path();
  if (!ckpt_dir.empty()) {
    fs::create_directories(ckpt_dir);
  }
  model::save_checkpoint(cfg.checkpoint_path, result.checkpoint);

  json log = json::object();
  log["epochs"] = json::array();
  for (const model::EpochStats & e : result.epochs) {
    json entry = json::object();
    entry["epoch"] = e.epoch;
    entry["mean_total"] = e.mean_total;
    entry["mean_endpoint"] = e.mean_endpoint;
    entry["mean_classification"] = e.mean_classification;
    entry["mean_refinement"] = e.mean_refinement;
    entry["learning_rate"] = e.learning_rate;
    log["epochs"].push_back(std::move(entry));
  }
  fs::path log_dir = cfg.out_dir.empty() ? fs::path(cfg.checkpoint_path).parent_path()
                                         : fs::path(cfg.out_dir);
  if (!log_dir.empty()) {
    fs::create_directories(log_dir);
  }
  write_text_file((log_dir / "train_log.json").string(), log.dump(2) + "\n");

  return result;
}

EvalResult run_eval(const Config & cfg)
{
  if (cfg.checkpoint_path.empty()) {
    throw Error("eval: no checkpoint path configured (data.checkpoint)");
  }
  if (cfg.dataset_dir.empty()) {
    throw Error("eval: no dataset configured (data.dataset)");
  }
  const model::Checkpoint ckpt = model::load_checkpoint(cfg.checkpoint_path);
  if (cfg.horizon_explicit) {
    const Horizon & h = ckpt.horizon;
    if (
      std::abs(h.t_obs - cfg.horizon.t_obs) > 1e-9 || std::abs(h.t_pre - cfg.horizon.t_pre) > 1e-9 ||
      std::abs(h.dt - cfg.horizon.dt) > 1e-9) {
      throw Error("eval: horizon mismatch between checkpoint and config");
    }
  }
  const std::vector<Scene> scenes = io::load_dataset(cfg.dataset_dir, ckpt.horizon);

  metrics::MetricReport report;
  double sum_ade = 0.0;
  double sum_fde = 0.0;
  double sum_min_ade = 0.0;
  double sum_min_fde = 0.0;
  std::map<AgentType, TypeAccum> per_type;
  std::size_t inside_points = 0;
  std::size_t area_points = 0;
  bool any_drivable = false;

  std::ostringstream csv;
  csv << "scene_id,agent_id,agent_type,ade,fde,min_ade,min_fde\n";

  for (const Scene & scene : scenes) {
    const geo::MovableArea * drivable = nullptr;
    if (scene.map && scene.map->drivable_area) {
      drivable = &*scene.map->drivable_area;
      any_drivable = true;
    }
    for (const Agent & agent : scene.agents) {
      if (agent.future.points.empty()) {
        continue;
      }
      const predict::PredictionSet pred = predict::predict_agent(ckpt, scene, agent, cfg.eval);
      if (pred.predictions.empty()) {
        throw Error("eval: no predictions for agent '" + agent.id + "'");
      }
      const std::vector<Vec2> gt = positions(agent.future.points);
      std::vector<std::vector<Vec2>> candidates;
      candidates.reserve(pred.predictions.size());
      for (const auto & rp : pred.predictions) {
        candidates.push_back(positions(rp.points));
      }
      const double a = metrics::ade(candidates.front(), gt);
      const double f = metrics::fde(candidates.front(), gt);
      const metrics::MinAdeFde mm = metrics::min_ade_fde(candidates, gt);
      sum_ade += a;
      sum_fde += f;
      sum_min_ade += mm.min_ade;
      sum_min_fde += mm.min_fde;
      TypeAccum & acc = per_type[agent.type];
      acc.ade += a;
      acc.fde += f;
      acc.count += 1;
      if (drivable != nullptr) {
        for (const Vec2 & p : candidates.front()) {
          inside_points += geo::point_in_area(p, *drivable) ? 1 : 0;
        }
        area_points += candidates.front().size();
      }
      csv << scene.id << ',' << agent.id << ',' << to_string(agent.type) << ','
          << io::format_double(a) << ',' << io::format_double(f) << ','
          << io::format_double(mm.min_ade) << ',' << io::format_double(mm.min_fde) << '\n';
      report.agent_count += 1;
    }
  }
  if (report.agent_count == 0) {
    throw Error("eval: dataset '" + cfg.dataset_dir + "' has no agents with ground-truth futures");
  }

  const double n = static_cast<double>(report.agent_count);
  report.ade = sum_ade / n;
  report.fde = sum_fde / n;
  report.min_ade = sum_min_ade / n;
  report.min_fde = sum_min_fde / n;
  for (const auto & [type, acc] : per_type) {
    metrics::TypeStats stats;
    stats.ade = acc.ade / static_cast<double>(acc.count);
    stats.fde = acc.fde / static_cast<double>(acc.count);
    stats.count = acc.count;
    report.per_type[type] = stats;
  }
  if (any_drivable) {
    if (area_points == 0) {
      throw Error("eval: drivable areas present but no predicted points to check");
    }
    report.dac = static_cast<double>(inside_points) / static_cast<double>(area_points);
  }
  if (!cfg.type_weights.empty()) {
    std::map<AgentType, double> ades;
    std::map<AgentType, double> fdes;
    for (const auto & [type, stats] : report.per_type) {
      ades[type] = stats.ade;
      fdes[type] = stats.fde;
    }
    report.wsade = metrics::weighted_sum(ades, cfg.type_weights);
    report.wsfde = metrics::weighted_sum(fdes, cfg.type_weights);
    report.type_weights = cfg.type_weights;
  }

  json j = json::object();
  j["ade"] = report.ade;
  j["fde"] = report.fde;
  j["min_ade"] = report.min_ade;
  j["min_fde"] = report.min_fde;
  j["agent_count"] = report.agent_count;
  if (report.dac) {
    j["dac"] = *report.dac;
  }
  json types = json::object();
  for (const auto & [type, stats] : report.per_type) {
    json entry = json::object();
    entry["ade"] = stats.ade;
    entry["fde"] = stats.fde;
    entry["count"] = stats.count;
    types[to_string(type)] = std::move(entry);
  }
  j["per_type"] = std::move(types);
  if (report.wsade) {
    j["wsade"] = *report.wsade;
    j["wsfde"] = *report.wsfde;
    json weights = json::object();
    for (const auto & [type, w] : report.type_weights) {
      weights[to_string(type)] = w;
    }
    j["type_weights"] = std::move(weights);
  }
  json opts = json::object();
  opts["k"] = cfg.eval.k;
  opts["sigma"] = cfg.eval.sigma;
  opts["use_safety"] = cfg.eval.use_safety;
  opts["no_refine"] = cfg.eval.no_refine;
  opts["no_classify"] = cfg.eval.no_classify;
  j["options"] = std::move(opts);

  EvalResult result;
  result.report = std::move(report);
  result.report_json = j.dump(2) + "\n";
  result.per_agent_csv = csv.str();

  if (!cfg.out_dir.empty()) {
    std::filesystem::create_directories(cfg.out_dir);
    const std::filesystem::path dir(cfg.out_dir);
    write_text_file((dir / "report.json").string(), result.report_json);
    write_text_file((dir / "per_agent.csv").string(), result.per_agent_csv);
  }
  return result;
}

std::string predictions_json(std::span<const predict::PredictionSet> sets)
{
  json out = json::array();
  for (const predict::PredictionSet & set : sets) {
    json j = json::object();
    j["scene_id"] = set.scene_id;
    j["agent_id"] = set.agent_id;
    j["multimodal"] = set.multimodal;
    j["safety_applied"] = set.safety_applied;
    if (set.multimodal) {
      j["d_ep"] = set.d_ep;
    } else {
      j["stage1_end"] = vec2_json(set.stage1_end);
    }
    json preds = json::array();
    for (const predict::RankedPrediction & rp : set.predictions) {
      json p = json::object();
      p["score"] = rp.score;
      p["gamma"] = rp.gamma;
      p["end_point"] = vec2_json(rp.end_point);
      if (rp.reference_line_id) {
        p["reference_line"] = *rp.reference_line_id;
      }
      json pts = json::array();
      for (const TimedPoint & tp : rp.points) {
        pts.push_back(json::array({tp.t, tp.x, tp.y}));
      }
      p["points"] = std::move(pts);
      preds.push_back(std::move(p));
    }
    j["predictions"] = std::move(preds);
    out.push_back(std::move(j));
  }
  return out.dump(2) + "\n";
}

}  // namespace trajprop::run
