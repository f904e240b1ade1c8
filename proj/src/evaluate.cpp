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

#include "velotrace/evaluate.hpp"

#include <numeric>

#include "velotrace/csv.hpp"
#include "velotrace/error.hpp"

namespace velotrace {
namespace {

using json = nlohmann::ordered_json;

std::vector<std::size_t> Iota(RowRange r) {
  std::vector<std::size_t> rows(r.size());
  std::iota(rows.begin(), rows.end(), r.begin);
  return rows;
}

// Rows the model can score: the recurrent model needs a full window behind
// each row.
std::vector<std::size_t> Scorable(const ModelSpec& spec, std::vector<std::size_t> rows) {
  if (spec.kind != ModelKind::kLstm) return rows;
  const std::size_t first = std::size_t(spec.lstm.lookback - 1);
  std::erase_if(rows, [&](std::size_t r) { return r < first; });
  return rows;
}

Metrics Score(const FeatureMatrix& m, const TrainedModel& model,
              std::span<const std::size_t> rows, std::vector<double>* predicted) {
  std::vector<double> yhat = model.Predict(m, rows);
  std::vector<double> y(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) y[i] = m.target[rows[i]];
  Metrics out = ComputeMetrics(y, yhat);
  if (predicted) *predicted = std::move(yhat);
  return out;
}

double PctChange(double ablated, double baseline) {
  if (baseline == 0) return ablated == 0 ? 0 : std::numeric_limits<double>::infinity();
  return (ablated - baseline) / baseline;
}

}  // namespace

json MetricsToJson(const Metrics& m) {
  json j = {{"mae", m.mae}, {"mse", m.mse}, {"rmse", m.rmse}};
  j["r2"] = m.r2 ? json(*m.r2) : json(nullptr);
  return j;
}

std::string EvalKey(const SplitRatio& ratio, int width_min, ModelKind kind) {
  return ratio.Label() + "|" + std::to_string(width_min) + "|" +
         std::string(ModelKindName(kind));
}

ModelEvaluation EvaluateModel(const FeatureMatrix& m, const SplitPlan& plan,
                              const ModelSpec& spec, const EvalOptions& options,
                              TrainedModel* model_out) {
  if (plan.test.end > m.n_rows || plan.train.end > plan.test.begin) {
    throw Error(ErrorKind::kParameter, "split plan does not match the feature matrix");
  }
  ModelEvaluation ev;
  ev.spec = spec;
  if (options.run_cv) {
    for (std::size_t k = 0; k < plan.cv_folds.size(); ++k) {
      const RowRange fold = plan.cv_folds[k];
      std::vector<std::size_t> train;
      for (std::size_t r = plan.train.begin; r < plan.train.end; ++r) {
        if (!fold.contains(r)) train.push_back(r);
      }
      const std::vector<std::size_t> valid = Scorable(spec, Iota(fold));
      if (valid.size() < 2) continue;
      const TrainedModel model = Train(m, train, spec);
      ev.cv.push_back({k, valid.size(), Score(m, model, valid, nullptr)});
    }
  }
  TrainedModel model = Train(m, Iota(plan.train), spec);
  const std::vector<std::size_t> test = Scorable(spec, Iota(plan.test));
  std::vector<double> predicted;
  ev.test = Score(m, model, test, &predicted);
  ev.predictions.reserve(test.size());
  for (std::size_t i = 0; i < test.size(); ++i) {
    ev.predictions.push_back({m.slot_start[test[i]], m.target[test[i]], predicted[i]});
  }
  ev.info = model.info;
  ev.parameter_hash = model.ParameterHash();
  if (model_out) *model_out = std::move(model);
  return ev;
}

EvalReport Evaluate(const FeatureMatrix& m, const SplitPlan& plan,
                    std::span<const ModelSpec> specs, const EvalOptions& options) {
  EvalReport report;
  report.ratio = plan.ratio;
  report.width_min = m.width_min;
  for (const auto& spec : specs) report.models.push_back(EvaluateModel(m, plan, spec, options));
  return report;
}

json EvalReport::ToJson() const {
  json j = json::object();
  for (const auto& ev : models) {
    json cv = json::array();
    for (const auto& f : ev.cv) {
      json e = MetricsToJson(f.metrics);
      e["fold"] = f.fold;
      e["rows"] = f.rows;
      cv.push_back(e);
    }
    j[EvalKey(ratio, width_min, ev.spec.kind)] = {
        {"ratio", ratio.Label()},
        {"width_min", width_min},
        {"spec", SpecToJson(ev.spec)},
        {"test", MetricsToJson(ev.test)},
        {"test_rows", ev.predictions.size()},
        {"cv", cv},
        {"training",
         {{"rows_used", ev.info.rows_used},
          {"iterations", ev.info.iterations},
          {"final_loss", ev.info.final_loss}}},
        {"parameter_hash", ev.parameter_hash}};
  }
  return j;
}

Ablation Ablate(const FeatureMatrix& m, const SplitPlan& plan, const ModelSpec& spec,
                std::string_view group) {
  const FeatureMatrix reduced = m.WithoutGroup(group);
  const EvalOptions no_cv{false};
  Ablation a;
  a.group = std::string(group);
  a.baseline = EvaluateModel(m, plan, spec, no_cv).test;
  a.ablated = EvaluateModel(reduced, plan, spec, no_cv).test;
  a.pct_mae = PctChange(a.ablated.mae, a.baseline.mae);
  a.pct_mse = PctChange(a.ablated.mse, a.baseline.mse);
  a.pct_rmse = PctChange(a.ablated.rmse, a.baseline.rmse);
  return a;
}

json AblationToJson(const Ablation& a) {
  return {{"group", a.group},
          {"baseline", MetricsToJson(a.baseline)},
          {"ablated", MetricsToJson(a.ablated)},
          {"pct_change", {{"mae", a.pct_mae}, {"mse", a.pct_mse}, {"rmse", a.pct_rmse}}}};
}

void WritePredictionsCsv(std::ostream& out, std::span<const PredictionRow> rows) {
  CsvWriter w(out);
  w.Row({"slot_start", "actual", "predicted"});
  for (const auto& r : rows) {
    w.Row({FormatTimestamp(r.slot_start), FormatDouble(r.actual), FormatDouble(r.predicted)});
  }
}

}  // namespace velotrace
