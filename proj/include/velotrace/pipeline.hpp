/*
 * Copyright 2026 The Velotrace Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Command-level orchestration: each Run* reads its inputs, writes its
// reports into the output directory and records them in manifest.json.

#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "velotrace/error.hpp"
#include "velotrace/model.hpp"
#include "velotrace/spatial.hpp"
#include "velotrace/synth.hpp"

namespace velotrace {

struct RunConfig {
  std::filesystem::path out = "velotrace_out";
  // Empty paths fall back to the file of the same role inside `out`.
  std::filesystem::path points, weather, pollution, calendar, hubs, features, model_file;
  std::uint64_t seed = 42;
  int utc_offset_min = 120;

  std::optional<BBox> bbox;  // derived from the data when absent
  double density_cell_m = 50;
  double dest_cell_m = 200;
  int top_k = 10;
  double distance_bin_m = 200;
  double duration_bin_s = 60;
  double speed_bin_mps = 0.2;

  std::optional<Date> week_a, week_b;

  int width_min = 60;
  std::string split = "90/10";
  int folds = 10;
  bool run_cv = true;
  bool numeric_hour = false;
  bool include_wind = false;
  std::vector<ModelKind> models{ModelKind::kLinear, ModelKind::kForest,
                                ModelKind::kBoost, ModelKind::kLstm};
  ForestParams forest;
  BoostParams boost;
  LstmParams lstm;
  std::vector<std::string> ablate;  // feature groups to ablate after training

  std::optional<int> horizon_min;  // predict; defaults to width_min

  SynthConfig synth;  // its seed is replaced by `seed`

  ModelSpec Spec(ModelKind kind) const;
  // Paths are left out of the hashed form so relocated runs compare equal.
  nlohmann::json ToJson(bool include_paths = true) const;
};

// Unknown keys are an Error(kParameter).
RunConfig RunConfigFromJson(const nlohmann::json& j);
RunConfig LoadRunConfig(const std::filesystem::path& path);
std::vector<ModelKind> ParseModelList(std::string_view text);

struct CommandResult {
  std::string command;
  std::vector<std::filesystem::path> outputs;
  nlohmann::json summary;  // small machine-readable outcome printed by the CLI
};

CommandResult RunSynth(const RunConfig& cfg);
CommandResult RunIngest(const RunConfig& cfg);
CommandResult RunDescribe(const RunConfig& cfg);
CommandResult RunSpatial(const RunConfig& cfg);
CommandResult RunCovariates(const RunConfig& cfg);
CommandResult RunFeatures(const RunConfig& cfg);
CommandResult RunTrain(const RunConfig& cfg);
CommandResult RunPredict(const RunConfig& cfg);

// Dispatches by subcommand name; Error(kParameter) for an unknown one.
CommandResult RunCommand(std::string_view command, const RunConfig& cfg);

// Process exit code for an error kind: 2 missing file, 3 schema or input,
// 4 training, 1 otherwise.
int ExitCodeFor(ErrorKind kind);

}  // namespace velotrace
