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

#include "velotrace/lstm.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "velotrace/error.hpp"

namespace velotrace {
namespace {

using Eigen::ArrayXXd;
using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Views {
  Eigen::Map<const MatrixXd> w;
  Eigen::Map<const MatrixXd> u;
  Eigen::Map<const VectorXd> b;
  Eigen::Map<const VectorXd> w_out;
  double b_out;
};

Views ViewsOf(const VectorXd& theta, int in, int h) {
  const Index g = 4 * Index(h);
  const double* p = theta.data();
  return {Eigen::Map<const MatrixXd>(p, g, in),
          Eigen::Map<const MatrixXd>(p + g * in, g, h),
          Eigen::Map<const VectorXd>(p + g * (in + h), g),
          Eigen::Map<const VectorXd>(p + g * (in + h + 1), h),
          p[g * (in + h + 1) + h]};
}

struct Step {
  MatrixXd x;      // I x B
  ArrayXXd gates;  // 4H x B, activated
  ArrayXXd c;      // H x B
  ArrayXXd tanh_c;
  MatrixXd h;
};

ArrayXXd Sigmoid(const ArrayXXd& z) { return 1.0 / (1.0 + (-z).exp()); }

// Forward pass over a batch; fills `steps` (lookback entries) when non-null
// and returns the read-out for each window.
VectorXd Forward(const Views& v, int hidden, const SequenceTable& table,
                 std::span<const std::size_t> ends, int lookback,
                 std::vector<Step>* steps) {
  const Index h = hidden;
  const Index batch = Index(ends.size());
  const Index in = table.input_size;
  MatrixXd h_prev = MatrixXd::Zero(h, batch);
  ArrayXXd c_prev = ArrayXXd::Zero(h, batch);
  MatrixXd x(in, batch);
  if (steps) steps->resize(std::size_t(lookback));
  for (int t = 0; t < lookback; ++t) {
    for (Index b = 0; b < batch; ++b) {
      const std::size_t row = ends[std::size_t(b)] + 1 - std::size_t(lookback) + std::size_t(t);
      x.col(b) = Eigen::Map<const VectorXd>(table.Row(row), in);
    }
    MatrixXd z = v.w * x;
    z.noalias() += v.u * h_prev;
    z.colwise() += v.b;
    ArrayXXd gates(4 * h, batch);
    gates.topRows(h) = Sigmoid(z.topRows(h).array());
    gates.middleRows(h, h) = Sigmoid(z.middleRows(h, h).array());
    gates.middleRows(2 * h, h) = z.middleRows(2 * h, h).array().tanh();
    gates.bottomRows(h) = Sigmoid(z.bottomRows(h).array());
    ArrayXXd c = gates.middleRows(h, h) * c_prev + gates.topRows(h) * gates.middleRows(2 * h, h);
    ArrayXXd tanh_c = c.tanh();
    MatrixXd h_new = (gates.bottomRows(h) * tanh_c).matrix();
    if (steps) {
      Step& s = (*steps)[std::size_t(t)];
      s.x = x;
      s.gates = std::move(gates);
      s.c = c;
      s.tanh_c = std::move(tanh_c);
      s.h = h_new;
    }
    h_prev = std::move(h_new);
    c_prev = std::move(c);
  }
  VectorXd y = h_prev.transpose() * v.w_out;
  y.array() += v.b_out;
  return y;
}

void CheckWindows(const SequenceTable& table, std::span<const std::size_t> ends,
                  int lookback) {
  if (lookback < 1) throw Error(ErrorKind::kParameter, "lookback must be >= 1");
  for (std::size_t e : ends) {
    if (e + 1 < std::size_t(lookback) || e >= table.rows) {
      throw Error(ErrorKind::kInput, "window ending at row " + std::to_string(e) +
                                         " needs " + std::to_string(lookback - 1) +
                                         " preceding rows");
    }
  }
}

}  // namespace

LstmNetwork::LstmNetwork(int input_size, int hidden)
    : input_size_(input_size),
      hidden_(hidden),
      theta_(VectorXd::Zero(Index(ParameterCount(input_size, hidden)))) {
  if (input_size < 1 || hidden < 1) {
    throw Error(ErrorKind::kParameter, "LSTM sizes must be positive");
  }
}

std::size_t LstmNetwork::ParameterCount(int input_size, int hidden) {
  const std::size_t h = std::size_t(hidden);
  return 4 * h * (std::size_t(input_size) + h + 1) + h + 1;
}

LstmNetwork LstmNetwork::Initialized(int input_size, int hidden, CounterRng& rng) {
  LstmNetwork net(input_size, hidden);
  const double k = 1.0 / std::sqrt(double(hidden));
  for (Index i = 0; i < net.theta_.size(); ++i) net.theta_[i] = rng.Uniform(-k, k);
  const Index g = 4 * Index(hidden);
  double* b = net.theta_.data() + g * (input_size + hidden);
  for (int j = 0; j < hidden; ++j) {
    b[hidden + j] = 1.0;  // forget gate
  }
  for (Index j = 0; j < g; ++j) {
    if (j < hidden || j >= 2 * hidden) b[j] = 0.0;
  }
  net.theta_[net.theta_.size() - 1] = 0.0;
  return net;
}

std::vector<double> LstmNetwork::Predict(const SequenceTable& table,
                                         std::span<const std::size_t> window_ends,
                                         int lookback) const {
  CheckWindows(table, window_ends, lookback);
  const Views v = ViewsOf(theta_, input_size_, hidden_);
  std::vector<double> out;
  out.reserve(window_ends.size());
  constexpr std::size_t kChunk = 256;
  for (std::size_t begin = 0; begin < window_ends.size(); begin += kChunk) {
    const auto chunk = window_ends.subspan(begin, std::min(kChunk, window_ends.size() - begin));
    const VectorXd y = Forward(v, hidden_, table, chunk, lookback, nullptr);
    out.insert(out.end(), y.data(), y.data() + y.size());
  }
  return out;
}

double LstmNetwork::LossAndGradient(const SequenceTable& table,
                                    std::span<const std::size_t> ends,
                                    std::span<const double> targets, int lookback,
                                    VectorXd* gradient) const {
  CheckWindows(table, ends, lookback);
  if (table.input_size != input_size_) {
    throw Error(ErrorKind::kParameter, "input width does not match the network");
  }
  const Views v = ViewsOf(theta_, input_size_, hidden_);
  const Index h = hidden_;
  const Index in = input_size_;
  const Index batch = Index(ends.size());
  std::vector<Step> steps;
  const VectorXd y = Forward(v, hidden_, table, ends, lookback, gradient ? &steps : nullptr);

  VectorXd err(batch);
  for (Index b = 0; b < batch; ++b) err[b] = y[b] - targets[ends[std::size_t(b)]];
  const double loss = err.squaredNorm() / (2.0 * double(batch));
  if (!gradient) return loss;

  gradient->setZero(theta_.size());
  const Index g = 4 * h;
  double* gp = gradient->data();
  Eigen::Map<MatrixXd> dw(gp, g, in);
  Eigen::Map<MatrixXd> du(gp + g * in, g, h);
  Eigen::Map<VectorXd> db(gp + g * (in + h), g);
  Eigen::Map<VectorXd> dw_out(gp + g * (in + h + 1), h);
  double& db_out = gp[g * (in + h + 1) + h];

  const VectorXd dy = err / double(batch);
  dw_out = steps.back().h * dy;
  db_out = dy.sum();

  MatrixXd dh = v.w_out * dy.transpose();  // H x B
  ArrayXXd dc = ArrayXXd::Zero(h, batch);
  MatrixXd dz(g, batch);
  for (int t = lookback - 1; t >= 0; --t) {
    const Step& s = steps[std::size_t(t)];
    const auto i_g = s.gates.topRows(h);
    const auto f_g = s.gates.middleRows(h, h);
    const auto c_g = s.gates.middleRows(2 * h, h);
    const auto o_g = s.gates.bottomRows(h);
    const ArrayXXd dh_a = dh.array();
    dc += dh_a * o_g * (1.0 - s.tanh_c.square());
    const ArrayXXd c_prev = t > 0 ? steps[std::size_t(t - 1)].c : ArrayXXd::Zero(h, batch);
    dz.topRows(h) = (dc * c_g * i_g * (1.0 - i_g)).matrix();
    dz.middleRows(h, h) = (dc * c_prev * f_g * (1.0 - f_g)).matrix();
    dz.middleRows(2 * h, h) = (dc * i_g * (1.0 - c_g.square())).matrix();
    dz.bottomRows(h) = (dh_a * s.tanh_c * o_g * (1.0 - o_g)).matrix();
    dw.noalias() += dz * s.x.transpose();
    if (t > 0) du.noalias() += dz * steps[std::size_t(t - 1)].h.transpose();
    db += dz.rowwise().sum();
    dh.noalias() = v.u.transpose() * dz;
    dc = dc * f_g;
  }
  return loss;
}

LstmTraining TrainLstm(const SequenceTable& table,
                       std::span<const std::size_t> window_ends,
                       std::span<const double> targets, const LstmParams& params,
                       std::uint64_t seed) {
  if (params.hidden < 1 || params.lookback < 1 || params.epochs < 0 ||
      params.batch < 1 || !(params.learning_rate > 0)) {
    throw Error(ErrorKind::kParameter, "invalid LSTM hyperparameters");
  }
  if (window_ends.empty()) throw Error(ErrorKind::kInput, "no training windows");
  CheckWindows(table, window_ends, params.lookback);

  CounterRng init_rng(DeriveKey(seed, 0));
  LstmTraining result{LstmNetwork::Initialized(table.input_size, params.hidden, init_rng), {}};
  VectorXd& theta = result.network.parameters();
  const Index np = theta.size();
  VectorXd m = VectorXd::Zero(np), v2 = VectorXd::Zero(np), grad(np);
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  double beta1_t = 1, beta2_t = 1;

  std::vector<std::size_t> order(window_ends.begin(), window_ends.end());
  const std::size_t batch = std::size_t(params.batch);
  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    CounterRng shuffle(DeriveKey(seed, 1000 + std::uint64_t(epoch)));
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[shuffle.Below(i)]);
    }
    double epoch_loss = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += batch) {
      const std::span<const std::size_t> ends(order.data() + begin,
                                              std::min(batch, order.size() - begin));
      const double loss = result.network.LossAndGradient(table, ends, targets,
                                                         params.lookback, &grad);
      if (!std::isfinite(loss) || !grad.allFinite()) {
        throw Error(ErrorKind::kTraining,
                    "LSTM training diverged at epoch " + std::to_string(epoch + 1));
      }
      epoch_loss += loss * double(ends.size());
      if (params.clip_norm > 0) {
        const double norm = grad.norm();
        if (norm > params.clip_norm) grad *= params.clip_norm / norm;
      }
      beta1_t *= kBeta1;
      beta2_t *= kBeta2;
      m = kBeta1 * m + (1 - kBeta1) * grad;
      v2 = kBeta2 * v2 + (1 - kBeta2) * grad.cwiseProduct(grad);
      const double step = params.learning_rate * std::sqrt(1 - beta2_t) / (1 - beta1_t);
      theta.array() -= step * m.array() / (v2.array().sqrt() + kEps);
    }
    epoch_loss /= double(order.size());
    if (!std::isfinite(epoch_loss)) {
      throw Error(ErrorKind::kTraining,
                  "LSTM training diverged at epoch " + std::to_string(epoch + 1));
    }
    result.epoch_losses.push_back(epoch_loss);
  }
  return result;
}

}  // namespace velotrace
