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

#include "velotrace/metrics.hpp"

#include <cmath>

#include "velotrace/error.hpp"

namespace velotrace {

Metrics ComputeMetrics(std::span<const double> actual,
                       std::span<const double> predicted) {
  if (actual.size() != predicted.size()) {
    throw Error(ErrorKind::kParameter, "metrics: length mismatch");
  }
  if (actual.size() < 2) throw Error(ErrorKind::kParameter, "metrics: need >= 2 samples");
  const double n = double(actual.size());
  double mean = 0;
  for (double v : actual) mean += v;
  mean /= n;
  double abs_sum = 0, ss_res = 0, ss_tot = 0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const double e = actual[i] - predicted[i];
    abs_sum += std::fabs(e);
    ss_res += e * e;
    ss_tot += (actual[i] - mean) * (actual[i] - mean);
  }
  Metrics m;
  m.mae = abs_sum / n;
  m.mse = ss_res / n;
  m.rmse = std::sqrt(m.mse);
  if (ss_tot > 0) m.r2 = 1.0 - ss_res / ss_tot;
  return m;
}

}  // namespace velotrace
