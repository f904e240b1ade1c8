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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "velotrace/error.hpp"
#include "velotrace/metrics.hpp"
#include "velotrace/model.hpp"

namespace velotrace {

void PrintTo(ModelKind kind, std::ostream* os) { *os << ModelKindName(kind); }

namespace {

RowMatrix RandomX(std::size_t n, std::size_t p, std::uint64_t seed) {
  CounterRng rng(DeriveKey(seed, 0));
  RowMatrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = rng.Uniform(-1, 1);
  }
  return x;
}

std::vector<double> Friedman(const RowMatrix& x, std::uint64_t seed, double noise) {
  CounterRng rng(DeriveKey(seed, 1));
  std::vector<double> y(std::size_t(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    y[std::size_t(i)] = 10 * std::sin(3 * x(i, 0) * x(i, 1)) + 5 * x(i, 2) * x(i, 2) +
                        3 * x(i, 3) + rng.Normal(0, noise);
  }
  return y;
}

std::vector<std::size_t> AllRows(std::size_t n) {
  std::vector<std::size_t> r(n);
  std::iota(r.begin(), r.end(), 0);
  return r;
}

FeatureMatrix ToMatrix(const RowMatrix& x, const std::vector<double>& y) {
  FeatureMatrix m;
  for (Eigen::Index j = 0; j < x.cols(); ++j) m.column_names.push_back("x" + std::to_string(j));
  m.n_rows = std::size_t(x.rows());
  m.values.assign(x.data(), x.data() + x.size());
  m.target = y;
  for (std::size_t i = 0; i < m.n_rows; ++i) {
    m.slot_start.push_back(UtcTime{} + std::chrono::hours(i));
  }
  InferGroups(m);
  return m;
}

TEST(Linear, RecoversLine) {
  RowMatrix x(5, 1);
  x << 0, 1, 2, 3, 4;
  const std::vector<double> y = {1, 3, 5, 7, 9};
  const LinearState s = FitLinear(x, y);
  EXPECT_NEAR(s.intercept, 1.0, 1e-10);
  EXPECT_NEAR(s.coefficients[0], 2.0, 1e-10);
  const double row[] = {10};
  EXPECT_NEAR(PredictLinear(s, row), 21.0, 1e-9);
}

TEST(Linear, ConstantTarget) {
  const RowMatrix x = RandomX(30, 3, 1);
  const std::vector<double> y(30, 4.5);
  const LinearState s = FitLinear(x, y);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    EXPECT_NEAR(PredictLinear(s, x.row(i).data()), 4.5, 1e-9);
  }
}

TEST(Linear, DuplicatedColumnSamePredictions) {
  const RowMatrix x = RandomX(50, 2, 2);
  const auto y = Friedman(RandomX(50, 4, 2), 2, 0.1);
  RowMatrix xd(50, 3);
  xd << x, x.col(1);
  const LinearState a = FitLinear(x, y);
  const LinearState b = FitLinear(xd, y);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    EXPECT_NEAR(PredictLinear(a, x.row(i).data()), PredictLinear(b, xd.row(i).data()), 1e-6);
  }
}

TEST(Forest, SingleUnboundedTreeInterpolates) {
  const RowMatrix x = RandomX(200, 4, 3);
  const auto y = Friedman(x, 3, 0.5);
  ForestParams p;
  p.trees = 1;
  p.bootstrap = false;
  p.max_depth = -1;
  p.min_samples_leaf = 1;
  p.max_features = 4;
  const ForestState s = FitForest(x, y, p, 7);
  double mse = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double e = PredictForest(s, x.row(i).data()) - y[std::size_t(i)];
    mse += e * e;
  }
  EXPECT_EQ(mse, 0.0);
}

TEST(Forest, DepthZeroIsMean) {
  const RowMatrix x = RandomX(40, 2, 4);
  const auto y = Friedman(RandomX(40, 4, 4), 4, 1);
  ForestParams p;
  p.trees = 5;
  p.max_depth = 0;
  p.bootstrap = false;
  const ForestState s = FitForest(x, y, p, 1);
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / double(y.size());
  EXPECT_NEAR(PredictForest(s, x.row(0).data()), mean, 1e-9);
}

TEST(Forest, DeterministicAndBounded) {
  const RowMatrix x = RandomX(300, 5, 5);
  const auto y = Friedman(x, 5, 1);
  ForestParams p;
  p.trees = 30;
  const ForestState a = FitForest(x, y, p, 11);
  const ForestState b = FitForest(x, y, p, 11);
  const ForestState c = FitForest(x, y, p, 12);
  const double lo = *std::min_element(y.begin(), y.end());
  const double hi = *std::max_element(y.begin(), y.end());
  const RowMatrix probe = RandomX(200, 5, 99) * 3.0;
  for (Eigen::Index i = 0; i < probe.rows(); ++i) {
    const double pa = PredictForest(a, probe.row(i).data());
    EXPECT_EQ(pa, PredictForest(b, probe.row(i).data()));
    EXPECT_GE(pa, lo);
    EXPECT_LE(pa, hi);
  }
  // Held-out error of two seeds agrees within a factor of two.
  const RowMatrix xt = RandomX(300, 5, 6);
  const auto yt = Friedman(xt, 6, 1);
  std::vector<double> pa, pc;
  for (Eigen::Index i = 0; i < xt.rows(); ++i) {
    pa.push_back(PredictForest(a, xt.row(i).data()));
    pc.push_back(PredictForest(c, xt.row(i).data()));
  }
  const double ma = ComputeMetrics(yt, pa).mse;
  const double mc = ComputeMetrics(yt, pc).mse;
  EXPECT_LT(std::max(ma, mc) / std::min(ma, mc), 2.0);
}

TEST(Boost, ZeroRoundsIsMean) {
  const RowMatrix x = RandomX(40, 3, 7);
  const auto y = Friedman(RandomX(40, 4, 7), 7, 1);
  BoostParams p;
  p.rounds = 0;
  const BoostState s = FitBoost(x, y, p, 1);
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / double(y.size());
  EXPECT_NEAR(PredictBoost(s, x.row(3).data()), mean, 1e-12);
}

TEST(Boost, FullStepUnlimitedDepthFitsTraining) {
  const RowMatrix x = RandomX(100, 4, 8);
  const auto y = Friedman(x, 8, 1);
  BoostParams p;
  p.rounds = 1;
  p.learning_rate = 1.0;
  p.max_depth = -1;
  const BoostState s = FitBoost(x, y, p, 1);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    EXPECT_NEAR(PredictBoost(s, x.row(i).data()), y[std::size_t(i)], 1e-9);
  }
}

TEST(Boost, TrainingLossNonIncreasing) {
  const RowMatrix x = RandomX(400, 5, 9);
  const auto y = Friedman(x, 9, 1);
  BoostParams p;
  p.rounds = 60;
  std::vector<double> losses;
  FitBoost(x, y, p, 3, &losses);
  ASSERT_EQ(losses.size(), 61u);
  for (std::size_t i = 1; i < losses.size(); ++i) EXPECT_LE(losses[i], losses[i - 1] + 1e-12);
}

TEST(Spec, Validation) {
  ModelSpec s;
  s.kind = ModelKind::kForest;
  s.forest.trees = 0;
  EXPECT_THROW(s.Validate(), Error);
  s = {};
  s.kind = ModelKind::kBoost;
  s.boost.learning_rate = 0;
  EXPECT_THROW(s.Validate(), Error);
  s.boost.learning_rate = 1.5;
  EXPECT_THROW(s.Validate(), Error);
  s.boost.learning_rate = 1.0;
  EXPECT_NO_THROW(s.Validate());
  s = {};
  s.kind = ModelKind::kForest;
  s.forest.max_depth = -2;
  EXPECT_THROW(s.Validate(), Error);
  s = {};
  s.kind = ModelKind::kLstm;
  s.lstm.hidden = 0;
  EXPECT_THROW(s.Validate(), Error);
  EXPECT_THROW(ParseModelKind("svm"), Error);
  try {
    SpecFromJson(nlohmann::json::parse(R"({"kind":"boost","hyperparameters":{"depth":3}})"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kParameter);
  }
}

TEST(Spec, JsonRoundTrip) {
  ModelSpec s;
  s.kind = ModelKind::kBoost;
  s.seed = 9;
  s.boost.rounds = 17;
  s.boost.subsample = 0.5;
  const ModelSpec back = SpecFromJson(SpecToJson(s));
  EXPECT_EQ(SpecToJson(back).dump(), SpecToJson(s).dump());
}

class ModelKinds : public ::testing::TestWithParam<ModelKind> {};

ModelSpec SmallSpec(ModelKind kind) {
  ModelSpec s;
  s.kind = kind;
  s.seed = 5;
  s.forest.trees = 10;
  s.boost.rounds = 20;
  s.lstm.hidden = 4;
  s.lstm.lookback = 4;
  s.lstm.epochs = 3;
  return s;
}

TEST_P(ModelKinds, JsonRoundTripPredictsIdentically) {
  const RowMatrix x = RandomX(120, 4, 10);
  const FeatureMatrix m = ToMatrix(x, Friedman(x, 10, 0.5));
  const auto train = AllRows(100);
  const TrainedModel model = Train(m, train, SmallSpec(GetParam()));
  const TrainedModel back = TrainedModel::FromJson(nlohmann::json::parse(model.ToJson().dump()));
  std::vector<std::size_t> rows(20);
  std::iota(rows.begin(), rows.end(), 100);
  EXPECT_EQ(model.Predict(m, rows), back.Predict(m, rows));
  EXPECT_EQ(model.ParameterHash(), back.ParameterHash());
  EXPECT_EQ(back.ToJson().dump(), model.ToJson().dump());
}

TEST_P(ModelKinds, TestRowsDoNotLeak) {
  const RowMatrix x = RandomX(120, 4, 11);
  const FeatureMatrix m = ToMatrix(x, Friedman(x, 11, 0.5));
  FeatureMatrix other = m;
  for (std::size_t r = 100; r < m.n_rows; ++r) {
    other.target[r] = -1000;
    for (std::size_t c = 0; c < m.n_cols(); ++c) other.values[r * m.n_cols() + c] = 77;
  }
  const auto train = AllRows(100);
  const ModelSpec spec = SmallSpec(GetParam());
  EXPECT_EQ(Train(m, train, spec).ParameterHash(), Train(other, train, spec).ParameterHash());
}

INSTANTIATE_TEST_SUITE_P(All, ModelKinds,
                         ::testing::Values(ModelKind::kLinear, ModelKind::kForest,
                                           ModelKind::kBoost, ModelKind::kLstm),
                         [](const auto& info) { return std::string(ModelKindName(info.param)); });

TEST(Model, CorruptArtifactRejected) {
  const RowMatrix x = RandomX(30, 2, 12);
  const FeatureMatrix m = ToMatrix(x, Friedman(RandomX(30, 4, 12), 12, 1));
  auto j = Train(m, AllRows(30), SmallSpec(ModelKind::kLinear)).ToJson();
  j["format_version"] = 99;
  EXPECT_THROW(TrainedModel::FromJson(j), Error);
}

}  // namespace
}  // namespace velotrace
