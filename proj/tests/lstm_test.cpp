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

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "velotrace/error.hpp"
#include "velotrace/lstm.hpp"
#include "velotrace/metrics.hpp"

namespace velotrace {
namespace {

struct Toy {
  std::vector<double> data;
  std::vector<double> targets;
  SequenceTable table;
};

Toy RandomToy(std::size_t rows, int inputs, std::uint64_t seed) {
  CounterRng rng(DeriveKey(seed, 0));
  Toy t;
  for (std::size_t i = 0; i < rows * std::size_t(inputs); ++i) t.data.push_back(rng.Uniform(-1, 1));
  for (std::size_t i = 0; i < rows; ++i) t.targets.push_back(rng.Uniform(0, 1));
  t.table = {t.data.data(), rows, inputs};
  return t;
}

TEST(Lstm, GradientMatchesFiniteDifferences) {
  const int lookback = 5;
  const Toy toy = RandomToy(12, 2, 1);
  CounterRng rng(DeriveKey(2, 0));
  LstmNetwork net = LstmNetwork::Initialized(2, 3, rng);
  // Random biases and read-out so no gradient block is trivially zero.
  for (Eigen::Index i = 0; i < net.parameters().size(); ++i) {
    net.parameters()[i] += rng.Uniform(-0.3, 0.3);
  }
  const std::vector<std::size_t> ends = {4, 7, 11};
  Eigen::VectorXd grad;
  net.LossAndGradient(toy.table, ends, toy.targets, lookback, &grad);
  ASSERT_EQ(std::size_t(grad.size()), LstmNetwork::ParameterCount(2, 3));
  const double h = 1e-4;
  for (Eigen::Index i = 0; i < grad.size(); ++i) {
    LstmNetwork plus = net, minus = net;
    plus.parameters()[i] += h;
    minus.parameters()[i] -= h;
    const double fd = (plus.LossAndGradient(toy.table, ends, toy.targets, lookback, nullptr) -
                       minus.LossAndGradient(toy.table, ends, toy.targets, lookback, nullptr)) /
                      (2 * h);
    const double scale = std::max({std::fabs(fd), std::fabs(grad[i]), 1e-3});
    EXPECT_LT(std::fabs(fd - grad[i]) / scale, 1e-4) << "parameter " << i;
  }
}

TEST(Lstm, SameSeedSameWeights) {
  const Toy toy = RandomToy(60, 3, 3);
  std::vector<std::size_t> ends(50);
  std::iota(ends.begin(), ends.end(), 9);
  LstmParams p;
  p.hidden = 4;
  p.lookback = 10;
  p.epochs = 3;
  p.batch = 8;
  const auto a = TrainLstm(toy.table, ends, toy.targets, p, 7);
  const auto b = TrainLstm(toy.table, ends, toy.targets, p, 7);
  const auto c = TrainLstm(toy.table, ends, toy.targets, p, 8);
  EXPECT_EQ(a.network.parameters(), b.network.parameters());
  EXPECT_EQ(a.epoch_losses, b.epoch_losses);
  EXPECT_NE(a.network.parameters(), c.network.parameters());
}

TEST(Lstm, LearnsConstantTarget) {
  Toy toy = RandomToy(200, 2, 4);
  std::fill(toy.targets.begin(), toy.targets.end(), 0.7);
  std::vector<std::size_t> ends(190);
  std::iota(ends.begin(), ends.end(), 9);
  LstmParams p;
  p.hidden = 4;
  p.lookback = 10;
  p.epochs = 40;
  p.batch = 16;
  p.learning_rate = 1e-2;
  const auto t = TrainLstm(toy.table, ends, toy.targets, p, 1);
  for (double y : t.network.Predict(toy.table, ends, p.lookback)) EXPECT_NEAR(y, 0.7, 0.035);
}

TEST(Lstm, FitsShiftedSinusoid) {
  const std::size_t n = 400;
  std::vector<double> data(n), targets(n);
  for (std::size_t i = 0; i < n; ++i) {
    data[i] = 0.5 + 0.5 * std::sin(0.3 * double(i));
    targets[i] = 0.5 + 0.5 * std::sin(0.3 * double(i + 1));
  }
  const SequenceTable table{data.data(), n, 1};
  std::vector<std::size_t> ends(n - 7);
  std::iota(ends.begin(), ends.end(), 7);
  LstmParams p;
  p.hidden = 8;
  p.lookback = 8;
  p.epochs = 60;
  p.batch = 16;
  p.learning_rate = 1e-2;
  const auto t = TrainLstm(table, ends, targets, p, 2);
  const auto pred = t.network.Predict(table, ends, p.lookback);
  std::vector<double> actual;
  for (std::size_t e : ends) actual.push_back(targets[e]);
  EXPECT_GE(*ComputeMetrics(actual, pred).r2, 0.95);
}

TEST(Lstm, DivergenceReported) {
  Toy toy = RandomToy(40, 2, 5);
  toy.targets[20] = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> ends(30);
  std::iota(ends.begin(), ends.end(), 9);
  LstmParams p;
  p.hidden = 2;
  p.lookback = 10;
  p.epochs = 2;
  try {
    TrainLstm(toy.table, ends, toy.targets, p, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kTraining);
    EXPECT_NE(std::string(e.what()).find("epoch"), std::string::npos);
  }
}

}  // namespace
}  // namespace velotrace
