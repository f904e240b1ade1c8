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

#include "velotrace/tree.hpp"

#include <algorithm>
#include <numeric>
#include <utility>

#include "velotrace/error.hpp"

namespace velotrace {
namespace {

class TreeBuilder {
 public:
  TreeBuilder(const RowMatrix& x, std::span<const double> y,
              const TreeParams& params, CounterRng& rng)
      : x_(x), y_(y), params_(params), rng_(rng) {
    features_.resize(std::size_t(x.cols()));
    std::iota(features_.begin(), features_.end(), 0);
    const int p = int(x.cols());
    tried_ = (params.max_features <= 0 || params.max_features >= p)
                 ? p
                 : params.max_features;
    min_leaf_ = std::size_t(std::max(1, params.min_samples_leaf));
  }

  std::vector<TreeNode> Build(std::vector<std::size_t> idx) {
    idx_ = std::move(idx);
    Grow(0, idx_.size(), 0);
    return std::move(nodes_);
  }

 private:
  int Grow(std::size_t begin, std::size_t end, int depth) {
    const int id = int(nodes_.size());
    nodes_.emplace_back();
    const std::size_t n = end - begin;
    double sum = 0;
    double first = y_[idx_[begin]];
    bool pure = true;
    for (std::size_t k = begin; k < end; ++k) {
      const double v = y_[idx_[k]];
      sum += v;
      pure = pure && v == first;
    }
    nodes_[std::size_t(id)].value = sum / double(n);
    const bool depth_left = params_.max_depth < 0 || depth < params_.max_depth;
    if (pure || !depth_left || n < 2 * min_leaf_) return id;

    int best_feature = -1;
    double best_threshold = 0;
    double best_gain = 0;
    const double parent = sum * sum / double(n);
    const std::size_t p = features_.size();
    for (std::size_t k = 0; k < std::size_t(tried_); ++k) {
      if (std::size_t(tried_) < p) {
        std::swap(features_[k], features_[k + rng_.Below(p - k)]);
      }
      const int f = features_[k];
      scratch_.clear();
      for (std::size_t j = begin; j < end; ++j) {
        scratch_.emplace_back(x_(Eigen::Index(idx_[j]), f), y_[idx_[j]]);
      }
      std::sort(scratch_.begin(), scratch_.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      if (scratch_.front().first == scratch_.back().first) continue;
      double left_sum = 0;
      for (std::size_t j = 0; j + 1 < n; ++j) {
        left_sum += scratch_[j].second;
        const std::size_t nl = j + 1;
        if (scratch_[j].first == scratch_[j + 1].first) continue;
        if (nl < min_leaf_ || n - nl < min_leaf_) continue;
        const double right_sum = sum - left_sum;
        const double gain = left_sum * left_sum / double(nl) +
                            right_sum * right_sum / double(n - nl) - parent;
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = f;
          const double a = scratch_[j].first, b = scratch_[j + 1].first;
          const double mid = a + (b - a) / 2;
          best_threshold = mid < b ? mid : a;
        }
      }
    }
    if (best_feature < 0) return id;

    const auto mid_it = std::partition(
        idx_.begin() + std::ptrdiff_t(begin), idx_.begin() + std::ptrdiff_t(end),
        [&](std::size_t i) { return x_(Eigen::Index(i), best_feature) <= best_threshold; });
    const std::size_t mid = std::size_t(mid_it - idx_.begin());
    const int left = Grow(begin, mid, depth + 1);
    const int right = Grow(mid, end, depth + 1);
    TreeNode& node = nodes_[std::size_t(id)];
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.left = left;
    node.right = right;
    return id;
  }

  const RowMatrix& x_;
  std::span<const double> y_;
  const TreeParams& params_;
  CounterRng& rng_;
  std::vector<int> features_;
  int tried_ = 0;
  std::size_t min_leaf_ = 1;
  std::vector<std::size_t> idx_;
  std::vector<TreeNode> nodes_;
  std::vector<std::pair<double, double>> scratch_;
};

}  // namespace

RegressionTree RegressionTree::Fit(const RowMatrix& x, std::span<const double> y,
                                   std::span<const std::size_t> sample,
                                   const TreeParams& params, CounterRng& rng) {
  if (sample.empty()) throw Error(ErrorKind::kInput, "tree: empty sample");
  if (std::size_t(x.rows()) != y.size()) {
    throw Error(ErrorKind::kParameter, "tree: row count mismatch");
  }
  TreeBuilder builder(x, y, params, rng);
  return RegressionTree(builder.Build({sample.begin(), sample.end()}));
}

}  // namespace velotrace
