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

#ifndef TRAJPROP_RUN_HPP_
#define TRAJPROP_RUN_HPP_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "trajprop/metrics.hpp"
#include "trajprop/model.hpp"
#include "trajprop/predict.hpp"
#include "trajprop/proposal.hpp"
#include "trajprop/scene.hpp"
#include "trajprop/types.hpp"

namespace trajprop::run
{

/// Named horizons: "eth-ucy-8" (8 obs -> 8 pred at 0.4 s), "eth-ucy-12"
/// (8 -> 12 at 0.4 s), "apolloscape" (6 -> 6 at 0.5 s), "argoverse"
/// (20 -> 30 at 0.1 s). Throws Error for anything else.
Horizon horizon_preset(const std::string & name);

/// Everything a pipeline run needs. Populated from defaults, optionally a
/// JSON config file, and finally CLI flag overrides.
struct Config
{
  std::string dataset_dir;        // directory with trajectories.csv (+ maps.json)
  std::string checkpoint_path;    // written by train, read by eval/predict/plot
  std::string out_dir;            // reports, logs, and plots land here

  Horizon horizon;
  bool horizon_explicit = false;  // true once a config file or flag set it
  proposal::GridConfig grid;

  model::Mode mode = model::Mode::base;
  bool use_map = false;           // map features require per-scene maps
  std::vector<std::size_t> hidden{64, 64};
  std::uint64_t model_seed = 0;

  model::TrainConfig train;

  predict::PredictOptions eval;
  std::map<AgentType, double> type_weights;  // non-empty enables WSADE/WSFDE
};

Config default_config();

/// Parses the JSON config schema with sections {data, horizon, grid, model,
/// train, eval}. Every section and key is optional (defaults above apply);
/// unknown sections or keys are errors, as are type mismatches. `origin` is
/// used in error messages. The horizon section takes either a "preset" name
/// or explicit t_obs/t_pre/dt, not both.
Config parse_config(const std::string & text, const std::string & origin);
Config load_config(const std::string & path);

struct TrainResult
{
  model::Checkpoint checkpoint;
  std::vector<model::EpochStats> epochs;
};

/// Loads the dataset, trains a fresh model, writes the checkpoint to
/// cfg.checkpoint_path and a per-epoch train_log.json to cfg.out_dir (next
/// to the checkpoint when out_dir is empty). Agents without a ground-truth
/// future are skipped; an empty training set is an error before any
/// training starts.
TrainResult run_train(const Config & cfg);

struct EvalResult
{
  metrics::MetricReport report;
  std::string report_json;    // contents of report.json
  std::string per_agent_csv;  // contents of per_agent.csv
};

/// Loads the checkpoint and dataset (at the checkpoint's horizon), predicts
/// every agent that has a ground-truth future, and aggregates metrics in
/// scene/agent order. DAC appears when any scene has a drivable area;
/// WSADE/WSFDE when cfg.type_weights is non-empty. When cfg.out_dir is set,
/// report.json and per_agent.csv are written there. A config horizon that
/// contradicts the checkpoint's is an error.
EvalResult run_eval(const Config & cfg);

/// JSON array with one object per prediction set, in input order. Stable
/// formatting: identical inputs give identical bytes.
std::string predictions_json(std::span<const predict::PredictionSet> sets);

}  // namespace trajprop::run

#endif  // TRAJPROP_RUN_HPP_
