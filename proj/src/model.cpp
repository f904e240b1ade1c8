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

#include "velotrace/model.hpp"

#include <algorithm>
#include <cmath>

#include "velotrace/error.hpp"
#include "velotrace/hash.hpp"
#include "velotrace/parallel.hpp"

namespace velotrace {
namespace {

using json = nlohmann::ordered_json;

void RequireFinite(const RowMatrix& x, std::span<const double> y) {
  if (!x.allFinite()) throw Error(ErrorKind::kInput, "non-finite feature value");
  for (double v : y) {
    if (!std::isfinite(v)) throw Error(ErrorKind::kInput, "non-finite target value");
  }
}

double TrainingMse(std::span<const double> y, const std::vector<double>& pred) {
  double s = 0;
  for (std::size_t i = 0; i < y.size(); ++i) s += (y[i] - pred[i]) * (y[i] - pred[i]);
  return y.empty() ? 0 : s / double(y.size());
}

json TreeToJson(const RegressionTree& tree) {
  json feature = json::array(), threshold = json::array(), left = json::array(),
       right = json::array(), value = json::array();
  for (const auto& n : tree.nodes()) {
    feature.push_back(n.feature);
    threshold.push_back(n.threshold);
    left.push_back(n.left);
    right.push_back(n.right);
    value.push_back(n.value);
  }
  return {{"feature", feature}, {"threshold", threshold}, {"left", left},
          {"right", right}, {"value", value}};
}

RegressionTree TreeFromJson(const nlohmann::json& j) {
  const auto feature = j.at("feature").get<std::vector<int>>();
  const auto threshold = j.at("threshold").get<std::vector<double>>();
  const auto left = j.at("left").get<std::vector<int>>();
  const auto right = j.at("right").get<std::vector<int>>();
  const auto value = j.at("value").get<std::vector<double>>();
  const std::size_t n = feature.size();
  if (threshold.size() != n || left.size() != n || right.size() != n ||
      value.size() != n || n == 0) {
    throw Error(ErrorKind::kSchema, "malformed tree in model artifact");
  }
  std::vector<TreeNode> nodes(n);
  for (std::size_t i = 0; i < n; ++i) {
    nodes[i] = {feature[i], threshold[i], left[i], right[i], value[i]};
    if (feature[i] >= 0 && (left[i] <= int(i) || right[i] <= int(i) ||
                            left[i] >= int(n) || right[i] >= int(n))) {
      throw Error(ErrorKind::kSchema, "tree child index out of range");
    }
  }
  return RegressionTree(std::move(nodes));
}

template <typename T>
void ReadIf(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

// Window ends whose whole lookback lies inside the row set.
std::vector<std::size_t> WindowEnds(std::size_t n_rows,
                                    std::span<const std::size_t> rows, int lookback) {
  std::vector<char> mask(n_rows, 0);
  for (std::size_t r : rows) mask[r] = 1;
  std::vector<std::size_t> ends;
  std::size_t run = 0;
  for (std::size_t r = 0; r < n_rows; ++r) {
    run = mask[r] ? run + 1 : 0;
    if (mask[r] && run >= std::size_t(lookback)) ends.push_back(r);
  }
  return ends;
}

}  // namespace

std::string_view ModelKindName(ModelKind kind) {
  switch (kind) {
    case ModelKind::kLinear: return "linear";
    case ModelKind::kForest: return "forest";
    case ModelKind::kBoost: return "boost";
    case ModelKind::kLstm: return "lstm";
  }
  return "unknown";
}

ModelKind ParseModelKind(std::string_view name) {
  for (ModelKind k : {ModelKind::kLinear, ModelKind::kForest, ModelKind::kBoost,
                      ModelKind::kLstm}) {
    if (name == ModelKindName(k)) return k;
  }
  throw Error(ErrorKind::kParameter, "unknown model kind '" + std::string(name) + "'");
}

void ModelSpec::Validate() const {
  auto fail = [](const std::string& what) {
    throw Error(ErrorKind::kParameter, "invalid hyperparameter: " + what);
  };
  switch (kind) {
    case ModelKind::kLinear:
      break;
    case ModelKind::kForest:
      if (forest.trees <= 0) fail("forest.trees must be > 0");
      if (forest.max_depth < -1) fail("forest.max_depth must be >= -1");
      if (forest.min_samples_leaf < 1) fail("forest.min_samples_leaf must be >= 1");
      if (forest.max_features < 0) fail("forest.max_features must be >= 0");
      break;
    case ModelKind::kBoost:
      if (boost.rounds < 0) fail("boost.rounds must be >= 0");
      if (boost.max_depth < -1) fail("boost.max_depth must be >= -1");
      if (!(boost.learning_rate > 0 && boost.learning_rate <= 1)) {
        fail("boost.learning_rate must be in (0, 1]");
      }
      if (boost.min_samples_leaf < 1) fail("boost.min_samples_leaf must be >= 1");
      if (!(boost.subsample > 0 && boost.subsample <= 1)) {
        fail("boost.subsample must be in (0, 1]");
      }
      break;
    case ModelKind::kLstm:
      if (lstm.hidden < 1) fail("lstm.hidden must be >= 1");
      if (lstm.lookback < 1) fail("lstm.lookback must be >= 1");
      if (lstm.epochs < 1) fail("lstm.epochs must be >= 1");
      if (lstm.batch < 1) fail("lstm.batch must be >= 1");
      if (!(lstm.learning_rate > 0)) fail("lstm.learning_rate must be > 0");
      break;
  }
}

json SpecToJson(const ModelSpec& spec) {
  json j;
  j["kind"] = ModelKindName(spec.kind);
  j["seed"] = spec.seed;
  switch (spec.kind) {
    case ModelKind::kLinear:
      j["hyperparameters"] = json::object();
      break;
    case ModelKind::kForest:
      j["hyperparameters"] = {{"trees", spec.forest.trees},
                              {"max_depth", spec.forest.max_depth},
                              {"min_samples_leaf", spec.forest.min_samples_leaf},
                              {"max_features", spec.forest.max_features},
                              {"bootstrap", spec.forest.bootstrap}};
      break;
    case ModelKind::kBoost:
      j["hyperparameters"] = {{"rounds", spec.boost.rounds},
                              {"max_depth", spec.boost.max_depth},
                              {"learning_rate", spec.boost.learning_rate},
                              {"min_samples_leaf", spec.boost.min_samples_leaf},
                              {"subsample", spec.boost.subsample}};
      break;
    case ModelKind::kLstm:
      j["hyperparameters"] = {{"hidden", spec.lstm.hidden},
                              {"lookback", spec.lstm.lookback},
                              {"epochs", spec.lstm.epochs},
                              {"batch", spec.lstm.batch},
                              {"learning_rate", spec.lstm.learning_rate},
                              {"clip_norm", spec.lstm.clip_norm}};
      break;
  }
  return j;
}

ModelSpec SpecFromJson(const nlohmann::json& j) {
  ModelSpec spec;
  try {
    spec.kind = ParseModelKind(j.at("kind").get<std::string>());
    ReadIf(j, "seed", spec.seed);
    const nlohmann::json hp = j.value("hyperparameters", nlohmann::json::object());
    auto allowed = [&](std::initializer_list<const char*> keys) {
      for (const auto& [key, _] : hp.items()) {
        if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return key == k; })) {
          throw Error(ErrorKind::kParameter, "unknown hyperparameter '" + key + "'");
        }
      }
    };
    switch (spec.kind) {
      case ModelKind::kLinear:
        allowed({});
        break;
      case ModelKind::kForest:
        allowed({"trees", "max_depth", "min_samples_leaf", "max_features", "bootstrap"});
        ReadIf(hp, "trees", spec.forest.trees);
        ReadIf(hp, "max_depth", spec.forest.max_depth);
        ReadIf(hp, "min_samples_leaf", spec.forest.min_samples_leaf);
        ReadIf(hp, "max_features", spec.forest.max_features);
        ReadIf(hp, "bootstrap", spec.forest.bootstrap);
        break;
      case ModelKind::kBoost:
        allowed({"rounds", "max_depth", "learning_rate", "min_samples_leaf", "subsample"});
        ReadIf(hp, "rounds", spec.boost.rounds);
        ReadIf(hp, "max_depth", spec.boost.max_depth);
        ReadIf(hp, "learning_rate", spec.boost.learning_rate);
        ReadIf(hp, "min_samples_leaf", spec.boost.min_samples_leaf);
        ReadIf(hp, "subsample", spec.boost.subsample);
        break;
      case ModelKind::kLstm:
        allowed({"hidden", "lookback", "epochs", "batch", "learning_rate", "clip_norm"});
        ReadIf(hp, "hidden", spec.lstm.hidden);
        ReadIf(hp, "lookback", spec.lstm.lookback);
        ReadIf(hp, "epochs", spec.lstm.epochs);
        ReadIf(hp, "batch", spec.lstm.batch);
        ReadIf(hp, "learning_rate", spec.lstm.learning_rate);
        ReadIf(hp, "clip_norm", spec.lstm.clip_norm);
        break;
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParameter, std::string("model spec: ") + e.what());
  }
  spec.Validate();
  return spec;
}

RowMatrix DesignMatrix(const FeatureMatrix& m, std::span<const std::size_t> rows) {
  RowMatrix x(Eigen::Index(rows.size()), Eigen::Index(m.n_cols()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto src = m.row(rows[i]);
    std::copy(src.begin(), src.end(), x.row(Eigen::Index(i)).data());
  }
  return x;
}

LinearState FitLinear(const RowMatrix& x, std::span<const double> y) {
  if (x.rows() < 2) throw Error(ErrorKind::kInput, "linear fit needs >= 2 rows");
  if (std::size_t(x.rows()) != y.size()) {
    throw Error(ErrorKind::kParameter, "linear fit: row count mismatch");
  }
  RequireFinite(x, y);
  Eigen::MatrixXd a(x.rows(), x.cols() + 1);
  a.col(0).setOnes();
  a.rightCols(x.cols()) = x;
  const Eigen::Map<const Eigen::VectorXd> target(y.data(), Eigen::Index(y.size()));
  // Minimum-norm least squares; full one-hot groups are collinear with the
  // intercept, so the coefficients are not unique but the fit is.
  const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
  const Eigen::VectorXd beta = cod.solve(target);
  LinearState s;
  s.intercept = beta[0];
  s.coefficients.assign(beta.data() + 1, beta.data() + beta.size());
  return s;
}

double PredictLinear(const LinearState& s, const double* row) {
  double v = s.intercept;
  for (std::size_t c = 0; c < s.coefficients.size(); ++c) v += s.coefficients[c] * row[c];
  return v;
}

ForestState FitForest(const RowMatrix& x, std::span<const double> y,
                      const ForestParams& params, std::uint64_t seed) {
  if (x.rows() < 2) throw Error(ErrorKind::kInput, "forest needs >= 2 rows");
  if (params.trees <= 0) throw Error(ErrorKind::kParameter, "forest.trees must be > 0");
  RequireFinite(x, y);
  const std::size_t n = std::size_t(x.rows());
  TreeParams tp;
  tp.max_depth = params.max_depth;
  tp.min_samples_leaf = params.min_samples_leaf;
  tp.max_features = params.max_features > 0
                        ? params.max_features
                        : int((x.cols() + 2) / 3);
  ForestState s;
  s.trees.resize(std::size_t(params.trees));
  ParallelFor(s.trees.size(), [&](std::size_t t) {
    CounterRng rng(DeriveKey(seed, t));
    std::vector<std::size_t> sample(n);
    for (std::size_t i = 0; i < n; ++i) sample[i] = params.bootstrap ? rng.Below(n) : i;
    s.trees[t] = RegressionTree::Fit(x, y, sample, tp, rng);
  });
  return s;
}

double PredictForest(const ForestState& s, const double* row) {
  double sum = 0;
  for (const auto& t : s.trees) sum += t.Predict(row);
  return sum / double(s.trees.size());
}

BoostState FitBoost(const RowMatrix& x, std::span<const double> y,
                    const BoostParams& params, std::uint64_t seed,
                    std::vector<double>* losses) {
  if (x.rows() < 2) throw Error(ErrorKind::kInput, "boosting needs >= 2 rows");
  if (!(params.learning_rate > 0 && params.learning_rate <= 1)) {
    throw Error(ErrorKind::kParameter, "boost.learning_rate must be in (0, 1]");
  }
  if (params.rounds < 0) throw Error(ErrorKind::kParameter, "boost.rounds must be >= 0");
  RequireFinite(x, y);
  const std::size_t n = std::size_t(x.rows());
  BoostState s;
  s.learning_rate = params.learning_rate;
  for (double v : y) s.base_score += v;
  s.base_score /= double(n);
  std::vector<double> pred(n, s.base_score), residual(n);
  if (losses) losses->push_back(TrainingMse(y, pred));
  TreeParams tp;
  tp.max_depth = params.max_depth;
  tp.min_samples_leaf = params.min_samples_leaf;
  std::vector<std::size_t> sample;
  for (int round = 0; round < params.rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) residual[i] = y[i] - pred[i];
    CounterRng rng(DeriveKey(seed, std::uint64_t(round)));
    sample.clear();
    for (std::size_t i = 0; i < n; ++i) {
      if (params.subsample >= 1 || rng.Uniform() < params.subsample) sample.push_back(i);
    }
    if (sample.empty()) sample.push_back(rng.Below(n));
    RegressionTree tree = RegressionTree::Fit(x, residual, sample, tp, rng);
    for (std::size_t i = 0; i < n; ++i) {
      pred[i] += params.learning_rate * tree.Predict(x.row(Eigen::Index(i)).data());
    }
    s.trees.push_back(std::move(tree));
    if (losses) losses->push_back(TrainingMse(y, pred));
  }
  return s;
}

double PredictBoost(const BoostState& s, const double* row) {
  double v = s.base_score;
  for (const auto& t : s.trees) v += s.learning_rate * t.Predict(row);
  return v;
}

TrainedModel Train(const FeatureMatrix& m, std::span<const std::size_t> train_rows,
                   const ModelSpec& spec) {
  spec.Validate();
  if (train_rows.size() < 2) throw Error(ErrorKind::kInput, "training needs >= 2 rows");
  for (std::size_t r : train_rows) {
    if (r >= m.n_rows) throw Error(ErrorKind::kParameter, "training row out of range");
  }
  TrainedModel model;
  model.spec = spec;
  model.column_names = m.column_names;
  model.width_min = m.width_min;
  model.info.rows_used = train_rows.size();

  if (spec.kind == ModelKind::kLstm) {
    const int lookback = spec.lstm.lookback;
    if (train_rows.size() < std::size_t(lookback) + 1) {
      throw Error(ErrorKind::kInput, "sequence shorter than lookback + 1");
    }
    LstmState st;
    st.scaler.Fit(m, train_rows);
    const FeatureMatrix scaled = st.scaler.Apply(m);
    const auto ends = WindowEnds(m.n_rows, train_rows, lookback);
    const SequenceTable table{scaled.values.data(), scaled.n_rows, int(scaled.n_cols())};
    LstmTraining trained = TrainLstm(table, ends, scaled.target, spec.lstm, spec.seed);
    st.network = std::move(trained.network);
    model.info.rows_used = ends.size();
    model.info.iterations = spec.lstm.epochs;
    model.info.loss_history = std::move(trained.epoch_losses);
    model.info.final_loss = model.info.loss_history.back();
    model.state = std::move(st);
    return model;
  }

  const RowMatrix x = DesignMatrix(m, train_rows);
  std::vector<double> y(train_rows.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = m.target[train_rows[i]];
  switch (spec.kind) {
    case ModelKind::kLinear:
      model.state = FitLinear(x, y);
      model.info.iterations = 1;
      break;
    case ModelKind::kForest:
      model.state = FitForest(x, y, spec.forest, spec.seed);
      model.info.iterations = spec.forest.trees;
      break;
    case ModelKind::kBoost:
      model.state = FitBoost(x, y, spec.boost, spec.seed, &model.info.loss_history);
      model.info.iterations = spec.boost.rounds;
      break;
    case ModelKind::kLstm:
      break;
  }
  std::vector<double> fitted(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double* row = x.row(Eigen::Index(i)).data();
    fitted[i] = std::visit(
        [&](const auto& s) -> double {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, LinearState>) return PredictLinear(s, row);
          if constexpr (std::is_same_v<S, ForestState>) return PredictForest(s, row);
          if constexpr (std::is_same_v<S, BoostState>) return PredictBoost(s, row);
          return 0.0;
        },
        model.state);
  }
  model.info.final_loss = TrainingMse(y, fitted);
  return model;
}

std::vector<double> TrainedModel::Predict(const FeatureMatrix& input,
                                          std::span<const std::size_t> rows) const {
  const bool aligned = input.column_names == column_names;
  const FeatureMatrix realigned = aligned ? FeatureMatrix{} : input.AlignedTo(column_names);
  const FeatureMatrix& m = aligned ? input : realigned;
  for (std::size_t r : rows) {
    if (r >= m.n_rows) throw Error(ErrorKind::kParameter, "prediction row out of range");
  }
  if (const auto* lstm = std::get_if<LstmState>(&state)) {
    const FeatureMatrix scaled = lstm->scaler.Apply(m);
    const SequenceTable table{scaled.values.data(), scaled.n_rows, int(scaled.n_cols())};
    std::vector<double> out = lstm->network.Predict(table, rows, spec.lstm.lookback);
    for (double& v : out) v = lstm->scaler.InverseTarget(v);
    return out;
  }
  std::vector<double> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double* row = m.values.data() + rows[i] * m.n_cols();
    out[i] = std::visit(
        [&](const auto& s) -> double {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, LinearState>) return PredictLinear(s, row);
          if constexpr (std::is_same_v<S, ForestState>) return PredictForest(s, row);
          if constexpr (std::is_same_v<S, BoostState>) return PredictBoost(s, row);
          return 0.0;
        },
        state);
  }
  return out;
}

json TrainedModel::ToJson() const {
  json j;
  j["format_version"] = kModelFormatVersion;
  j["spec"] = SpecToJson(spec);
  j["width_min"] = width_min;
  j["column_names"] = column_names;
  j["training"] = {{"rows_used", info.rows_used},
                   {"iterations", info.iterations},
                   {"final_loss", info.final_loss},
                   {"loss_history", info.loss_history}};
  json st;
  std::visit(
      [&](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, LinearState>) {
          st = {{"intercept", s.intercept}, {"coefficients", s.coefficients}};
        } else if constexpr (std::is_same_v<S, ForestState>) {
          json trees = json::array();
          for (const auto& t : s.trees) trees.push_back(TreeToJson(t));
          st = {{"trees", trees}};
        } else if constexpr (std::is_same_v<S, BoostState>) {
          json trees = json::array();
          for (const auto& t : s.trees) trees.push_back(TreeToJson(t));
          st = {{"base_score", s.base_score},
                {"learning_rate", s.learning_rate},
                {"trees", trees}};
        } else {
          const auto& theta = s.network.parameters();
          json ranges = json::array();
          for (const auto& r : s.scaler.ranges()) ranges.push_back({r.min, r.max});
          st = {{"input_size", s.network.input_size()},
                {"hidden", s.network.hidden()},
                {"parameters", std::vector<double>(theta.data(), theta.data() + theta.size())},
                {"scaler",
                 {{"columns", s.scaler.columns()},
                  {"ranges", ranges},
                  {"target", {s.scaler.target_range().min, s.scaler.target_range().max}}}}};
        }
      },
      state);
  j["state"] = st;
  return j;
}

TrainedModel TrainedModel::FromJson(const nlohmann::json& j) {
  TrainedModel model;
  try {
    if (j.at("format_version").get<int>() != kModelFormatVersion) {
      throw Error(ErrorKind::kSchema, "unsupported model format version");
    }
    model.spec = SpecFromJson(j.at("spec"));
    model.width_min = j.at("width_min").get<int>();
    model.column_names = j.at("column_names").get<std::vector<std::string>>();
    const auto& tr = j.at("training");
    model.info.rows_used = tr.at("rows_used").get<std::size_t>();
    model.info.iterations = tr.at("iterations").get<int>();
    model.info.final_loss = tr.at("final_loss").get<double>();
    model.info.loss_history = tr.at("loss_history").get<std::vector<double>>();
    const auto& st = j.at("state");
    switch (model.spec.kind) {
      case ModelKind::kLinear: {
        LinearState s;
        s.intercept = st.at("intercept").get<double>();
        s.coefficients = st.at("coefficients").get<std::vector<double>>();
        if (s.coefficients.size() != model.column_names.size()) {
          throw Error(ErrorKind::kSchema, "coefficient count mismatch");
        }
        model.state = std::move(s);
        break;
      }
      case ModelKind::kForest: {
        ForestState s;
        for (const auto& t : st.at("trees")) s.trees.push_back(TreeFromJson(t));
        if (s.trees.empty()) throw Error(ErrorKind::kSchema, "forest without trees");
        model.state = std::move(s);
        break;
      }
      case ModelKind::kBoost: {
        BoostState s;
        s.base_score = st.at("base_score").get<double>();
        s.learning_rate = st.at("learning_rate").get<double>();
        for (const auto& t : st.at("trees")) s.trees.push_back(TreeFromJson(t));
        model.state = std::move(s);
        break;
      }
      case ModelKind::kLstm: {
        const int in = st.at("input_size").get<int>();
        const int hidden = st.at("hidden").get<int>();
        LstmNetwork net(in, hidden);
        const auto theta = st.at("parameters").get<std::vector<double>>();
        if (theta.size() != LstmNetwork::ParameterCount(in, hidden) ||
            std::size_t(in) != model.column_names.size()) {
          throw Error(ErrorKind::kSchema, "LSTM parameter count mismatch");
        }
        std::copy(theta.begin(), theta.end(), net.parameters().data());
        const auto& sc = st.at("scaler");
        std::vector<MinMaxScaler::Range> ranges;
        for (const auto& r : sc.at("ranges")) ranges.push_back({r.at(0).get<double>(), r.at(1).get<double>()});
        const auto target = sc.at("target");
        LstmState s{std::move(net),
                    MinMaxScaler::FromParts(sc.at("columns").get<std::vector<std::size_t>>(),
                                            std::move(ranges),
                                            {target.at(0).get<double>(), target.at(1).get<double>()})};
        model.state = std::move(s);
        break;
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kSchema, std::string("model artifact: ") + e.what());
  }
  return model;
}

std::string TrainedModel::ParameterHash() const {
  return Sha256Hex(ToJson().at("state").dump());
}

}  // namespace velotrace
