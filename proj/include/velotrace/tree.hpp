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

// CART regression trees (variance reduction) shared by the forest and the
// boosting ensemble.

#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <vector>

#include "velotrace/rng.hpp"

namespace velotrace {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct TreeParams {
  int max_depth = -1;  // < 0: unlimited; 0: a single leaf
  int min_samples_leaf = 1;
  int max_features = 0;  // features tried per split; <= 0 or >= p: all
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0;
  int left = -1;
  int right = -1;
  double value = 0;
};

class RegressionTree {
 public:
  RegressionTree() = default;
  explicit RegressionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

  // Fits on the rows listed in `sample` (duplicates allowed, as produced by
  // bootstrapping). `rng` drives the per-split feature subsets.
  static RegressionTree Fit(const RowMatrix& x, std::span<const double> y,
                            std::span<const std::size_t> sample,
                            const TreeParams& params, CounterRng& rng);

  double Predict(const double* row) const {
    int n = 0;
    while (nodes_[std::size_t(n)].feature >= 0) {
      const TreeNode& node = nodes_[std::size_t(n)];
      n = row[node.feature] <= node.threshold ? node.left : node.right;
    }
    return nodes_[std::size_t(n)].value;
  }

  const std::vector<TreeNode>& nodes() const { return nodes_; }

 private:
  std::vector<TreeNode> nodes_;
};

}  // namespace velotrace
