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

// Single-layer LSTM regressor with a linear read-out, trained by full
// backpropagation through time over fixed-length windows.

#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "velotrace/rng.hpp"

namespace velotrace {

struct LstmParams {
  int hidden = 32;
  int lookback = 48;
  int epochs = 50;
  int batch = 32;
  double learning_rate = 1e-3;
  double clip_norm = 5.0;  // global gradient-norm clip; <= 0 disables
};

// Windows are read from a row-major table with `input_size` columns: the
// window ending at row e covers rows e - lookback + 1 ... e.
struct SequenceTable {
  const double* data = nullptr;
  std::size_t rows = 0;
  int input_size = 0;

  const double* Row(std::size_t r) const {
    return data + r * std::size_t(input_size);
  }
};

class LstmNetwork {
 public:
  LstmNetwork() = default;
  // Zero parameters.
  LstmNetwork(int input_size, int hidden);
  // Uniform(-1/sqrt(H), 1/sqrt(H)) weights, forget-gate bias 1.
  static LstmNetwork Initialized(int input_size, int hidden, CounterRng& rng);

  int input_size() const { return input_size_; }
  int hidden() const { return hidden_; }

  // Flat parameter vector: W (4H x I, column-major), U (4H x H), b (4H),
  // w_out (H), b_out. Gate blocks are ordered input, forget, cell, output.
  Eigen::VectorXd& parameters() { return theta_; }
  const Eigen::VectorXd& parameters() const { return theta_; }
  static std::size_t ParameterCount(int input_size, int hidden);

  std::vector<double> Predict(const SequenceTable& table,
                              std::span<const std::size_t> window_ends,
                              int lookback) const;

  // Loss = sum_b (y_b - target_b)^2 / (2 B). `targets` is indexed by row.
  // Writes d loss / d parameters into `gradient` when non-null.
  double LossAndGradient(const SequenceTable& table,
                         std::span<const std::size_t> window_ends,
                         std::span<const double> targets, int lookback,
                         Eigen::VectorXd* gradient) const;

 private:
  int input_size_ = 0;
  int hidden_ = 0;
  Eigen::VectorXd theta_;
};

struct LstmTraining {
  LstmNetwork network;
  std::vector<double> epoch_losses;
};

// Adam with bias correction; windows reshuffled every epoch from a stream
// derived from `seed`. Throws Error(kTraining) naming the epoch when the loss
// turns non-finite.
LstmTraining TrainLstm(const SequenceTable& table,
                       std::span<const std::size_t> window_ends,
                       std::span<const double> targets, const LstmParams& params,
                       std::uint64_t seed);

}  // namespace velotrace
