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

// Model-ready datasets: slot aggregation, dummy encoding, lag features,
// chronological splits and min-max scaling.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "velotrace/covariates.hpp"
#include "velotrace/ingest.hpp"
#include "velotrace/time.hpp"

namespace velotrace {

struct SlotSeries {
  int width_min = 60;
  UtcTime start;
  std::vector<std::uint32_t> counts;
  std::uint64_t out_of_span = 0;

  UtcTime SlotStart(std::size_t i) const {
    return start + std::chrono::minutes(std::int64_t(i) * width_min);
  }
  UtcTime End() const { return SlotStart(counts.size()); }
};

// Counts start instants into [start, end) slots of `width_min` (30 or 60).
// `start` must be aligned to the width. Instants outside the span go to
// out_of_span.
SlotSeries AggregateSlots(std::span<const UtcTime> starts, int width_min,
                          UtcTime start, UtcTime end);
SlotSeries AggregateSlots(std::span<const Trip> trips, int width_min,
                          UtcTime start, UtcTime end);

struct ColumnGroup {
  std::string name;
  std::vector<std::size_t> columns;
  bool numeric = false;  // scaled; dummies are not
};

struct FeatureMatrix {
  int width_min = 60;
  std::vector<std::string> column_names;
  std::vector<ColumnGroup> groups;
  std::size_t n_rows = 0;
  std::vector<double> values;  // row-major n_rows x n_cols
  std::vector<double> target;
  std::vector<UtcTime> slot_start;

  std::size_t n_cols() const { return column_names.size(); }
  double at(std::size_t row, std::size_t col) const {
    return values[row * n_cols() + col];
  }
  std::span<const double> row(std::size_t r) const {
    return {values.data() + r * n_cols(), n_cols()};
  }
  std::vector<double> Column(std::size_t col) const;
  std::optional<std::size_t> ColumnIndex(std::string_view name) const;
  const ColumnGroup* FindGroup(std::string_view name) const;

  // Drops a group (or a single column by name); Error(kParameter) if unknown.
  FeatureMatrix WithoutGroup(std::string_view name) const;
  // Appends a numeric column forming its own group.
  FeatureMatrix WithColumn(const std::string& name, std::span<const double> column) const;
  // Rebuilds the matrix with exactly `names`, zero-filling absent columns.
  FeatureMatrix AlignedTo(std::span<const std::string> names) const;
};

// Maps a column name onto its group ("hour_07" -> "hour_of_the_day").
std::string GroupOfColumn(std::string_view column);
// Rebuilds `groups` from column names.
void InferGroups(FeatureMatrix& m);

struct FeatureOptions {
  bool numeric_hour = false;          // one "hour" column instead of 24 dummies
  bool hour_history_two_slots = false;  // width 30: sum of the two prior slots
  bool include_wind = false;
  std::span<const PollutionRecord> pollution;  // adds pm/o3/no2/so2 when non-empty
};

struct DroppedRow {
  UtcTime slot_start;
  std::string reason;
};

struct FeatureBuild {
  FeatureMatrix matrix;
  std::vector<DroppedRow> dropped;
};

// Rows lacking a full week of history are dropped, as are slots whose hour
// has no weather record (or missing pollution when requested).
FeatureBuild BuildFeatures(const SlotSeries& slots,
                           std::span<const WeatherRecord> weather,
                           std::span<const CalendarEntry> calendar,
                           int utc_offset_min, const FeatureOptions& options = {});

struct FeatureCorrelation {
  std::string column;
  std::optional<double> r;  // nullopt for zero-variance columns
};

// Sorted by |r| descending; undefined columns last in column order.
std::vector<FeatureCorrelation> FeatureTargetCorrelation(const FeatureMatrix& m);

struct RowRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
  bool contains(std::size_t i) const { return i >= begin && i < end; }
};

struct SplitRatio {
  int train_pct = 90;
  int test_pct = 10;
  std::string Label() const;
};

// Accepts "90/10", "80/20", "70/30", "60/40".
SplitRatio ParseSplitRatio(std::string_view text);

struct SplitPlan {
  SplitRatio ratio;
  RowRange train;
  RowRange test;
  std::vector<RowRange> cv_folds;
};

inline constexpr int kDefaultFolds = 10;

// Test = last floor(n * test_pct / 100) rows. The training range is cut into
// `folds` contiguous near-equal blocks (0 disables CV); Error(kParameter)
// when there are fewer training rows than folds.
SplitPlan ChronologicalSplit(std::size_t n_rows, SplitRatio ratio,
                             int folds = kDefaultFolds);

class MinMaxScaler {
 public:
  // Fits numeric columns and the target over `rows`.
  void Fit(const FeatureMatrix& m, RowRange rows);
  void Fit(const FeatureMatrix& m, std::span<const std::size_t> rows);
  bool fitted() const { return fitted_; }

  FeatureMatrix Apply(const FeatureMatrix& m) const;
  double ScaleTarget(double v) const;
  double InverseTarget(double v) const;
  // Inverse of Apply for every scaled column.
  FeatureMatrix Inverse(const FeatureMatrix& scaled) const;

  struct Range {
    double min = 0;
    double max = 0;
  };
  const std::vector<std::size_t>& columns() const { return columns_; }
  const std::vector<Range>& ranges() const { return ranges_; }
  Range target_range() const { return target_; }
  static MinMaxScaler FromParts(std::vector<std::size_t> columns,
                                std::vector<Range> ranges, Range target);

 private:
  void RequireFitted() const;

  bool fitted_ = false;
  std::vector<std::size_t> columns_;
  std::vector<Range> ranges_;
  Range target_;
};

void WriteFeaturesCsv(std::ostream& out, const FeatureMatrix& m);
FeatureMatrix ReadFeaturesCsv(const std::filesystem::path& path);
std::string SplitPlanToJson(const SplitPlan& plan);

}  // namespace velotrace
