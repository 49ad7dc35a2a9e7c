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

// trajprop command line: synth / train / predict / eval / plot.
//
// Every run-affecting flag mirrors a JSON config key; a flag given on the
// command line overrides the corresponding config value.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "trajprop/dataset_io.hpp"
#include "trajprop/predict.hpp"
#include "trajprop/run.hpp"
#include "trajprop/svg.hpp"
#include "trajprop/synth.hpp"
#include "trajprop/types.hpp"

namespace
{

using trajprop::run::Config;

// One mirrored flag: remembers whether the user passed it so config-file
// values survive when they did not.
struct Flags
{
  std::string config_path;

  std::string dataset;
  std::string checkpoint;
  std::string out;

  std::string preset;
  double t_obs = 0.0;
  double t_pre = 0.0;
  double dt = 0.0;

  double grid_range = 0.0;
  double grid_interval = 0.0;
  std::vector<double> gammas;

  std::string mode;
  bool use_map = false;
  std::vector<std::size_t> hidden;
  std::uint64_t model_seed = 0;

  std::size_t batch_size = 0;
  std::size_t epochs = 0;
  double learning_rate = 0.0;
  double lr_decay = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double ad_threshold = 0.0;
  double negative_ratio = 0.0;
  bool no_augment = false;
  std::uint64_t train_seed = 0;

  std::size_t k = 0;
  double sigma = 0.0;
  bool no_safety = false;
  bool no_refine = false;
  bool no_classify = false;
  std::vector<std::string> type_weights;  // "type=weight"

  CLI::App * cmd = nullptr;

  // True when the flag exists on this subcommand and was supplied.
  bool given(const std::string & name) const
  {
    const CLI::Option * opt = cmd->get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
  }
};

void add_data_flags(CLI::App * cmd, Flags & f)
{
  f.cmd = cmd;
  cmd->add_option("--config", f.config_path, "JSON config file");
  cmd->add_option("--dataset", f.dataset, "dataset directory (data.dataset)");
  cmd->add_option("--checkpoint", f.checkpoint, "checkpoint path (data.checkpoint)");
  cmd->add_option("--out", f.out, "output directory or file (data.out)");
}

void add_horizon_flags(CLI::App * cmd, Flags & f)
{
  cmd->add_option(
    "--preset", f.preset, "horizon preset: eth-ucy-8, eth-ucy-12, apolloscape, argoverse");
  cmd->add_option("--t-obs", f.t_obs, "observed duration, seconds (horizon.t_obs)");
  cmd->add_option("--t-pre", f.t_pre, "predicted duration, seconds (horizon.t_pre)");
  cmd->add_option("--dt", f.dt, "frame spacing, seconds (horizon.dt)");
}

void add_model_flags(CLI::App * cmd, Flags & f)
{
  cmd->add_option("--grid-range", f.grid_range, "end-point grid extent, meters (grid.range_m)");
  cmd->add_option(
    "--grid-interval", f.grid_interval, "end-point grid spacing, meters (grid.interval_m)");
  cmd->add_option("--gammas", f.gammas, "curvature-control offsets (grid.gammas)")
    ->delimiter(',');
  cmd->add_option("--mode", f.mode, "base or multimodal (model.mode)");
  cmd->add_flag("--use-map", f.use_map, "add map features (model.use_map)");
  cmd->add_option("--hidden", f.hidden, "hidden layer sizes (model.hidden)")->delimiter(',');
  cmd->add_option("--model-seed", f.model_seed, "weight init seed (model.seed)");
}

void add_train_flags(CLI::App * cmd, Flags & f)
{
  cmd->add_option("--batch-size", f.batch_size, "scenes per batch (train.batch_size)");
  cmd->add_option("--epochs", f.epochs, "training epochs (train.epochs)");
  cmd->add_option("--learning-rate", f.learning_rate, "Adam step size (train.learning_rate)");
  cmd->add_option("--lr-decay", f.lr_decay, "per-epoch rate multiplier (train.lr_decay)");
  cmd->add_option("--alpha", f.alpha, "refinement loss weight (train.alpha)");
  cmd->add_option("--beta", f.beta, "negative weight in the refinement normalizer (train.beta)");
  cmd->add_option(
    "--ad-threshold", f.ad_threshold, "positive-label cutoff, meters (train.ad_threshold_m)");
  cmd->add_option(
    "--negative-ratio", f.negative_ratio, "sampled negatives per positive (train.negative_ratio)");
  cmd->add_flag("--no-augment", f.no_augment, "disable rotation/flip augmentation (train.augment)");
  cmd->add_option("--train-seed", f.train_seed, "shuffling/sampling seed (train.seed)");
}

void add_eval_flags(CLI::App * cmd, Flags & f)
{
  cmd->add_option("--k", f.k, "ranked trajectories to keep (eval.k)");
  cmd->add_option("--sigma", f.sigma, "safety decay width (eval.sigma)");
  cmd->add_flag("--no-safety", f.no_safety, "disable safety score decay (eval.use_safety)");
  cmd->add_flag("--no-refine", f.no_refine, "ablation: keep unrefined geometry (eval.no_refine)");
  cmd->add_flag(
    "--no-classify", f.no_classify, "ablation: rank by end-point distance (eval.no_classify)");
  cmd->add_option(
       "--type-weight", f.type_weights, "WSADE/WSFDE weight as type=value (eval.type_weights)")
    ->take_all();
}

Config build_config(const Flags & f)
{
  Config cfg = f.config_path.empty() ? trajprop::run::default_config()
                                     : trajprop::run::load_config(f.config_path);

  if (f.given("--dataset")) cfg.dataset_dir = f.dataset;
  if (f.given("--checkpoint")) cfg.checkpoint_path = f.checkpoint;
  if (f.given("--out")) cfg.out_dir = f.out;

  if (f.given("--preset")) {
    if (f.given("--t-obs") || f.given("--t-pre") || f.given("--dt")) {
      throw trajprop::Error("--preset cannot be combined with --t-obs/--t-pre/--dt");
    }
    cfg.horizon = trajprop::run::horizon_preset(f.preset);
    cfg.horizon_explicit = true;
  }
  if (f.given("--t-obs")) { cfg.horizon.t_obs = f.t_obs; cfg.horizon_explicit = true; }
  if (f.given("--t-pre")) { cfg.horizon.t_pre = f.t_pre; cfg.horizon_explicit = true; }
  if (f.given("--dt")) { cfg.horizon.dt = f.dt; cfg.horizon_explicit = true; }

  if (f.given("--grid-range")) cfg.grid.range_m = f.grid_range;
  if (f.given("--grid-interval")) cfg.grid.interval_m = f.grid_interval;
  if (f.given("--gammas")) cfg.grid.gammas = f.gammas;

  if (f.given("--mode")) {
    if (f.mode == "base") {
      cfg.mode = trajprop::model::Mode::base;
    } else if (f.mode == "multimodal") {
      cfg.mode = trajprop::model::Mode::multimodal;
    } else {
      throw trajprop::Error("--mode must be base or multimodal");
    }
  }
  if (f.given("--use-map")) cfg.use_map = true;
  if (f.given("--hidden")) cfg.hidden = f.hidden;
  if (f.given("--model-seed")) cfg.model_seed = f.model_seed;

  if (f.given("--batch-size")) cfg.train.batch_size = f.batch_size;
  if (f.given("--epochs")) cfg.train.epochs = f.epochs;
  if (f.given("--learning-rate")) cfg.train.learning_rate = f.learning_rate;
  if (f.given("--lr-decay")) cfg.train.lr_decay = f.lr_decay;
  if (f.given("--alpha")) cfg.train.alpha = f.alpha;
  if (f.given("--beta")) cfg.train.beta = f.beta;
  if (f.given("--ad-threshold")) cfg.train.ad_threshold = f.ad_threshold;
  if (f.given("--negative-ratio")) cfg.train.negative_ratio = f.negative_ratio;
  if (f.given("--no-augment")) cfg.train.augment = false;
  if (f.given("--train-seed")) cfg.train.seed = f.train_seed;

  if (f.given("--k")) cfg.eval.k = f.k;
  if (f.given("--sigma")) cfg.eval.sigma = f.sigma;
  if (f.given("--no-safety")) cfg.eval.use_safety = false;
  if (f.given("--no-refine")) cfg.eval.no_refine = true;
  if (f.given("--no-classify")) cfg.eval.no_classify = true;
  for (const std::string & tw : f.type_weights) {
    const auto eq = tw.find('=');
    if (eq == std::string::npos) {
      throw trajprop::Error("--type-weight expects type=value, got '" + tw + "'");
    }
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(tw.substr(eq + 1), &used);
    } catch (const std::exception &) {
      throw trajprop::Error("--type-weight expects type=value, got '" + tw + "'");
    }
    if (used != tw.size() - eq - 1) {
      throw trajprop::Error("--type-weight expects type=value, got '" + tw + "'");
    }
    cfg.type_weights[trajprop::agent_type_from_string(tw.substr(0, eq))] = value;
  }

  return cfg;
}

void emit_report(const std::string & text, const std::string & out_path)
{
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream os(out_path, std::ios::binary);
  if (!os) {
    throw trajprop::Error("cannot write '" + out_path + "'");
  }
  os << text;
}

int run_synth(const Flags & f, const trajprop::synth::SynthSpec & spec_in)
{
  const Config cfg = build_config(f);
  trajprop::synth::SynthSpec spec = spec_in;
  spec.horizon = cfg.horizon;
  if (cfg.out_dir.empty()) {
    throw trajprop::Error("synth: --out directory required");
  }
  const auto scenes = trajprop::synth::synth_dataset(spec);
  trajprop::io::save_dataset(cfg.out_dir, scenes);
  std::cout << "wrote " << scenes.size() << " scenes to " << cfg.out_dir << "\n";
  return 0;
}

int run_train_cmd(const Flags & f)
{
  const Config cfg = build_config(f);
  const auto result = trajprop::run::run_train(cfg);
  std::cout << "wrote checkpoint " << cfg.checkpoint_path << " (" << result.epochs.size()
            << (result.epochs.size() == 1 ? " epoch" : " epochs");
  if (!result.epochs.empty()) {
    std::cout << ", final loss " << result.epochs.back().mean_total;
  }
  std::cout << ")\n";
  return 0;
}

int run_predict_cmd(const Flags & f)
{
  const Config cfg = build_config(f);
  if (cfg.checkpoint_path.empty()) {
    throw trajprop::Error("predict: no checkpoint path configured (data.checkpoint)");
  }
  if (cfg.dataset_dir.empty()) {
    throw trajprop::Error("predict: no dataset configured (data.dataset)");
  }
  const auto ckpt = trajprop::model::load_checkpoint(cfg.checkpoint_path);
  const auto scenes = trajprop::io::load_dataset(cfg.dataset_dir, ckpt.horizon);
  std::vector<trajprop::predict::PredictionSet> sets;
  for (const auto & scene : scenes) {
    auto scene_sets = trajprop::predict::predict_scene(ckpt, scene, cfg.eval);
    for (auto & s : scene_sets) {
      sets.push_back(std::move(s));
    }
  }
  emit_report(trajprop::run::predictions_json(sets), f.given("--out") ? f.out : "");
  return 0;
}

int run_eval_cmd(const Flags & f)
{
  const Config cfg = build_config(f);
  const auto result = trajprop::run::run_eval(cfg);
  if (cfg.out_dir.empty()) {
    std::cout << result.report_json;
  } else {
    std::cout << "wrote report to " << cfg.out_dir << "\n";
  }
  return 0;
}

int run_plot_cmd(const Flags & f)
{
  const Config cfg = build_config(f);
  if (cfg.checkpoint_path.empty()) {
    throw trajprop::Error("plot: no checkpoint path configured (data.checkpoint)");
  }
  if (cfg.dataset_dir.empty()) {
    throw trajprop::Error("plot: no dataset configured (data.dataset)");
  }
  if (cfg.out_dir.empty()) {
    throw trajprop::Error("plot: --out directory required");
  }
  const auto ckpt = trajprop::model::load_checkpoint(cfg.checkpoint_path);
  const auto scenes = trajprop::io::load_dataset(cfg.dataset_dir, ckpt.horizon);
  std::filesystem::create_directories(cfg.out_dir);
  std::size_t count = 0;
  for (const auto & scene : scenes) {
    for (const auto & agent : scene.agents) {
      const auto pred = trajprop::predict::predict_agent(ckpt, scene, agent, cfg.eval);
      const auto path =
        std::filesystem::path(cfg.out_dir) / (scene.id + "_" + agent.id + ".svg");
      trajprop::svg::emit_svg(scene, pred, path.string());
      ++count;
    }
  }
  std::cout << "wrote " << count << " plots to " << cfg.out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"two-stage trajectory proposal prediction"};
  app.require_subcommand(1);

  Flags synth_flags;
  trajprop::synth::SynthSpec spec;
  CLI::App * synth = app.add_subcommand("synth", "generate a synthetic dataset");
  add_data_flags(synth, synth_flags);
  add_horizon_flags(synth, synth_flags);
  synth->add_option("--scenes", spec.scenes, "number of scenes");
  synth->add_option("--noise", spec.noise_std, "coordinate noise stddev, meters");
  synth->add_option("--seed", spec.seed, "generator seed");
  synth->add_option("--w-constant-velocity", spec.w_constant_velocity, "family weight");
  synth->add_option("--w-constant-acceleration", spec.w_constant_acceleration, "family weight");
  synth->add_option("--w-lane-following", spec.w_lane_following, "family weight");
  synth->add_option("--w-intersection", spec.w_intersection, "family weight");

  Flags train_flags;
  CLI::App * train = app.add_subcommand("train", "train a model and write a checkpoint");
  add_data_flags(train, train_flags);
  add_horizon_flags(train, train_flags);
  add_model_flags(train, train_flags);
  add_train_flags(train, train_flags);

  Flags predict_flags;
  CLI::App * predict = app.add_subcommand("predict", "emit ranked predictions as JSON");
  add_data_flags(predict, predict_flags);
  add_eval_flags(predict, predict_flags);

  Flags eval_flags;
  CLI::App * eval = app.add_subcommand("eval", "compute forecasting metrics");
  add_data_flags(eval, eval_flags);
  add_horizon_flags(eval, eval_flags);
  add_eval_flags(eval, eval_flags);

  Flags plot_flags;
  CLI::App * plot = app.add_subcommand("plot", "render per-agent SVG plots");
  add_data_flags(plot, plot_flags);
  add_eval_flags(plot, plot_flags);

  try {
    app.parse(argc, argv);
    if (synth->parsed()) {
      return run_synth(synth_flags, spec);
    }
    if (train->parsed()) {
      return run_train_cmd(train_flags);
    }
    if (predict->parsed()) {
      return run_predict_cmd(predict_flags);
    }
    if (eval->parsed()) {
      return run_eval_cmd(eval_flags);
    }
    if (plot->parsed()) {
      return run_plot_cmd(plot_flags);
    }
  } catch (const CLI::ParseError & e) {
    return app.exit(e);
  } catch (const std::exception & e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
