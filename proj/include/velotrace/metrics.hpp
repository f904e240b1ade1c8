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

#pragma once

#include <optional>
#include <span>

namespace velotrace {

struct Metrics {
  double mae = 0;
  double mse = 0;
  double rmse = 0;
  std::optional<double> r2;  // nullopt when the actuals have zero variance
};

// Throws Error(kParameter) for length mismatch or fewer than 2 samples.
Metrics ComputeMetrics(std::span<const double> actual,
                       std::span<const double> predicted);

}  // namespace velotrace
