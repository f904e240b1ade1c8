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

// Temporal descriptive statistics: histograms, weekday/hour profiles and
// month-over-month change.

#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "velotrace/ingest.hpp"

namespace velotrace {

struct Histogram {
  double bin_width = 1;
  double origin = 0;
  // Dense run of bins from the lowest to the highest occupied bin.
  std::vector<std::pair<double, std::uint64_t>> bins;
  std::uint64_t total = 0;

  // Lower edge of the fullest bin (first one on ties); nullopt when empty.
  std::optional<double> ModeLowerEdge() const;
};

// Counts v in bin floor((v - origin) / bin_width). Throws Error(kParameter)
// for bin_width <= 0 and Error(kInput) for non-finite values.
Histogram BuildHistogram(std::span<const double> values, double bin_width,
                         double origin = 0);

// Fraction of values strictly below `threshold`. 0 for empty input.
double ShareBelow(std::span<const double> values, double threshold);
// Midpoint median; nullopt for empty input.
std::optional<double> Median(std::span<const double> values);

void WriteHistogramCsv(std::ostream& out, const Histogram& h);

struct TemporalProfile {
  std::array<std::uint64_t, 7> weekday_counts{};  // Monday..Sunday
  std::array<std::uint64_t, 24> hourly_weekday{};
  std::array<std::uint64_t, 24> hourly_weekend{};
  std::map<std::chrono::year_month, std::uint64_t> monthly_counts;
  double workingday_share = 0;
  std::uint64_t total = 0;
};

// Attributes each trip to the local weekday, hour and month of its start.
// Throws Error(kParameter) on empty input.
TemporalProfile BuildTemporalProfile(std::span<const Trip> trips,
                                     int utc_offset_min);

struct MonthChange {
  std::chrono::year_month month;
  std::uint64_t count = 0;
  // (count - previous calendar month) / previous; nullopt when the previous
  // month is absent or zero.
  std::optional<double> pct_change;
  double share_of_peak = 0;
};

// Requires at least two months; throws Error(kParameter) otherwise.
std::vector<MonthChange> MonthlyChange(const TemporalProfile& profile);

std::string ProfileToJson(const TemporalProfile& profile);
void WriteMonthlyCsv(std::ostream& out, std::span<const MonthChange> months);

}  // namespace velotrace
