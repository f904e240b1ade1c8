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
#include <sstream>

#include "velotrace/error.hpp"
#include "velotrace/evaluate.hpp"

namespace velotrace {
namespace {

// y = 3 * a + noise-free weekly pattern carried by week_history.
FeatureMatrix Synthetic(std::size_t n) {
  CounterRng rng(DeriveKey(21, 0));
  FeatureMatrix m;
  m.column_names = {"a", "week_history", "flat"};
  m.n_rows = n;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = rng.Uniform(0, 10);
    const double w = rng.Uniform(0, 20);
    m.values.insert(m.values.end(), {a, w, 1.0});
    m.target.push_back(3 * a + w);
    m.slot_start.push_back(UtcTime{} + std::chrono::hours(i));
  }
  InferGroups(m);
  return m;
}

TEST(Evaluate, ExactModelScoresPerfectly) {
  const FeatureMatrix m = Synthetic(200);
  const SplitPlan plan = ChronologicalSplit(m.n_rows, ParseSplitRatio("80/20"), 5);
  ModelSpec spec;
  const ModelEvaluation e = EvaluateModel(m, plan, spec);
  EXPECT_NEAR(*e.test.r2, 1.0, 1e-9);
  EXPECT_LT(e.test.mae, 1e-8);
  ASSERT_EQ(e.cv.size(), 5u);
  for (const auto& f : e.cv) EXPECT_NEAR(*f.metrics.r2, 1.0, 1e-9);
  ASSERT_EQ(e.predictions.size(), 40u);
  EXPECT_EQ(e.predictions.front().slot_start, m.slot_start[160]);
}

TEST(Evaluate, MeanBaselineHasNoSkill) {
  FeatureMatrix m = Synthetic(200);
  // Only the constant column is left, so every model predicts a constant.
  m = m.WithoutGroup("a").WithoutGroup("week_history");
  const SplitPlan plan = ChronologicalSplit(m.n_rows, ParseSplitRatio("80/20"), 0);
  for (ModelKind k : {ModelKind::kLinear, ModelKind::kBoost}) {
    ModelSpec spec;
    spec.kind = k;
    spec.boost.rounds = 10;
    EXPECT_LE(*EvaluateModel(m, plan, spec).test.r2, 1e-12);
  }
}

TEST(Evaluate, ReportDeterministic) {
  const FeatureMatrix m = Synthetic(150);
  const SplitPlan plan = ChronologicalSplit(m.n_rows, ParseSplitRatio("90/10"), 3);
  std::vector<ModelSpec> specs(2);
  specs[0].kind = ModelKind::kForest;
  specs[0].forest.trees = 8;
  specs[1].kind = ModelKind::kBoost;
  specs[1].boost.rounds = 15;
  const auto a = Evaluate(m, plan, specs).ToJson().dump();
  const auto b = Evaluate(m, plan, specs).ToJson().dump();
  EXPECT_EQ(a, b);
  const auto j = nlohmann::json::parse(a);
  EXPECT_TRUE(j.contains(EvalKey(plan.ratio, 60, ModelKind::kForest)));
  EXPECT_TRUE(j.contains("90/10|60|boost"));
}

TEST(Ablate, InformativeVersusUseless) {
  const FeatureMatrix m = Synthetic(300);
  const SplitPlan plan = ChronologicalSplit(m.n_rows, ParseSplitRatio("80/20"), 0);
  ModelSpec spec;
  const Ablation useful = Ablate(m, plan, spec, "week_history");
  EXPECT_GT(useful.pct_mae, 20.0);
  const Ablation useless = Ablate(m, plan, spec, "flat");
  EXPECT_LT(std::fabs(useless.pct_mae), 2.0);
  try {
    Ablate(m, plan, spec, "missing_group");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kParameter);
  }
}

TEST(Evaluate, MetricsJsonNullR2) {
  Metrics m{1, 1, 1, std::nullopt};
  EXPECT_TRUE(MetricsToJson(m)["r2"].is_null());
}

TEST(Evaluate, PredictionsCsv) {
  std::ostringstream out;
  const std::vector<PredictionRow> rows = {{ParseTimestamp("2017-05-01T10:00:00Z"), 4, 3.5}};
  WritePredictionsCsv(out, rows);
  EXPECT_EQ(out.str(), "slot_start,actual,predicted\n2017-05-01T10:00:00Z,4,3.5\n");
}

}  // namespace
}  // namespace velotrace
