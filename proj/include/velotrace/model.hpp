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

// The four forecasters behind one spec/train/predict surface, plus JSON
// model artifacts.

#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "velotrace/features.hpp"
#include "velotrace/lstm.hpp"
#include "velotrace/tree.hpp"

namespace velotrace {

enum class ModelKind { kLinear, kForest, kBoost, kLstm };
std::string_view ModelKindName(ModelKind kind);
ModelKind ParseModelKind(std::string_view name);

struct ForestParams {
  int trees = 100;
  int max_depth = 12;
  int min_samples_leaf = 2;
  int max_features = 0;  // 0: ceil(p / 3)
  bool bootstrap = true;
};

struct BoostParams {
  int rounds = 200;
  int max_depth = 4;
  double learning_rate = 0.1;
  int min_samples_leaf = 1;
  double subsample = 1.0;  // row fraction per round, drawn from the seed
};

struct ModelSpec {
  ModelKind kind = ModelKind::kLinear;
  ForestParams forest;
  BoostParams boost;
  LstmParams lstm;
  std::uint64_t seed = 42;

  // Error(kParameter) when a hyperparameter is outside its valid range.
  void Validate() const;
};

nlohmann::ordered_json SpecToJson(const ModelSpec& spec);
// Unknown kinds or keys are Error(kParameter); missing keys keep defaults.
ModelSpec SpecFromJson(const nlohmann::json& j);

struct LinearState {
  double intercept = 0;
  std::vector<double> coefficients;
};

struct ForestState {
  std::vector<RegressionTree> trees;
};

struct BoostState {
  double base_score = 0;
  double learning_rate = 0.1;
  std::vector<RegressionTree> trees;
};

struct LstmState {
  LstmNetwork network;
  MinMaxScaler scaler;
};

struct TrainingInfo {
  std::size_t rows_used = 0;
  int iterations = 0;  // rounds, trees or epochs
  double final_loss = 0;
  std::vector<double> loss_history;
};

class TrainedModel {
 public:
  ModelSpec spec;
  std::vector<std::string> column_names;
  int width_min = 60;
  TrainingInfo info;
  std::variant<LinearState, ForestState, BoostState, LstmState> state;

  // Predictions for `rows` of `m`. Columns are matched by name; the LSTM
  // additionally needs lookback - 1 rows before each requested row.
  std::vector<double> Predict(const FeatureMatrix& m,
                              std::span<const std::size_t> rows) const;

  nlohmann::ordered_json ToJson() const;
  static TrainedModel FromJson(const nlohmann::json& j);
  // SHA-256 of the serialized learned state.
  std::string ParameterHash() const;
};

inline constexpr int kModelFormatVersion = 1;

// Trains on `train_rows` only. For the LSTM, windows are the rows whose whole
// lookback lies inside `train_rows`, and the scaler is fitted on them.
TrainedModel Train(const FeatureMatrix& m, std::span<const std::size_t> train_rows,
                   const ModelSpec& spec);

// Individual trainers over a plain design matrix.
LinearState FitLinear(const RowMatrix& x, std::span<const double> y);
ForestState FitForest(const RowMatrix& x, std::span<const double> y,
                      const ForestParams& params, std::uint64_t seed);
// Per-round training MSE is appended to `losses` (entry 0 = base score).
BoostState FitBoost(const RowMatrix& x, std::span<const double> y,
                    const BoostParams& params, std::uint64_t seed,
                    std::vector<double>* losses = nullptr);

double PredictLinear(const LinearState& s, const double* row);
double PredictForest(const ForestState& s, const double* row);
double PredictBoost(const BoostState& s, const double* row);

RowMatrix DesignMatrix(const FeatureMatrix& m, std::span<const std::size_t> rows);

}  // namespace velotrace
