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

#pragma once

#include <nlohmann/json.hpp>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "velotrace/features.hpp"
#include "velotrace/metrics.hpp"
#include "velotrace/model.hpp"

namespace velotrace {

struct EvalOptions {
  bool run_cv = true;
};

struct FoldResult {
  std::size_t fold = 0;
  std::size_t rows = 0;  // validation rows actually scored
  Metrics metrics;
};

struct PredictionRow {
  UtcTime slot_start;
  double actual = 0;
  double predicted = 0;
};

struct ModelEvaluation {
  ModelSpec spec;
  std::vector<FoldResult> cv;
  Metrics test;
  std::vector<PredictionRow> predictions;
  TrainingInfo info;
  std::string parameter_hash;
};

struct EvalReport {
  SplitRatio ratio;
  int width_min = 60;
  std::vector<ModelEvaluation> models;

  // Keyed "<ratio>|<width>|<kind>".
  nlohmann::ordered_json ToJson() const;
};

nlohmann::ordered_json MetricsToJson(const Metrics& m);
std::string EvalKey(const SplitRatio& ratio, int width_min, ModelKind kind);

// Fits on the training range and scores the test range. `model_out`, when
// non-null, receives the final fit.
ModelEvaluation EvaluateModel(const FeatureMatrix& m, const SplitPlan& plan,
                              const ModelSpec& spec, const EvalOptions& options = {},
                              TrainedModel* model_out = nullptr);

EvalReport Evaluate(const FeatureMatrix& m, const SplitPlan& plan,
                    std::span<const ModelSpec> specs, const EvalOptions& options = {});

struct Ablation {
  std::string group;
  Metrics baseline;
  Metrics ablated;
  double pct_mae = 0;
  double pct_mse = 0;
  double pct_rmse = 0;
};

// Retrains without the group's columns and compares held-out test metrics.
Ablation Ablate(const FeatureMatrix& m, const SplitPlan& plan, const ModelSpec& spec,
                std::string_view group);
nlohmann::ordered_json AblationToJson(const Ablation& a);

void WritePredictionsCsv(std::ostream& out, std::span<const PredictionRow> rows);

}  // namespace velotrace
