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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "velotrace/error.hpp"
#include "velotrace/features.hpp"
#include "velotrace/rng.hpp"

namespace velotrace {
namespace {

using namespace std::chrono_literals;

constexpr std::size_t kWeek30 = 7 * 48;

std::vector<WeatherRecord> FlatWeather(UtcTime start, UtcTime end) {
  std::vector<WeatherRecord> out;
  for (UtcTime t = start; t < end; t += 1h) out.push_back({t, 15.0, 0.0, 2.0});
  return out;
}

SlotSeries Series(int width, UtcTime start, std::vector<std::uint32_t> counts) {
  SlotSeries s;
  s.width_min = width;
  s.start = start;
  s.counts = std::move(counts);
  return s;
}

TEST(AggregateSlots, ThirtyMinuteExample) {
  const UtcTime start = ParseTimestamp("2017-05-01T10:00:00Z");
  const std::vector<UtcTime> t = {ParseTimestamp("2017-05-01T10:05:00Z"),
                                  ParseTimestamp("2017-05-01T10:20:00Z"),
                                  ParseTimestamp("2017-05-01T10:45:00Z")};
  const SlotSeries s = AggregateSlots(t, 30, start, start + 1h);
  EXPECT_EQ(s.counts, (std::vector<std::uint32_t>{2, 1}));
  EXPECT_EQ(s.out_of_span, 0u);
}

TEST(AggregateSlots, OutOfSpanCounted) {
  const UtcTime start = ParseTimestamp("2017-05-01T10:00:00Z");
  const std::vector<UtcTime> t = {start - 1s, start, start + 1h};
  const SlotSeries s = AggregateSlots(t, 60, start, start + 1h);
  EXPECT_EQ(s.counts, (std::vector<std::uint32_t>{1}));
  EXPECT_EQ(s.out_of_span, 2u);
}

TEST(AggregateSlots, MisalignedStartRejected) {
  const UtcTime start = ParseTimestamp("2017-05-01T10:10:00Z");
  EXPECT_THROW(AggregateSlots(std::vector<UtcTime>{}, 30, start, start + 1h), Error);
  EXPECT_THROW(AggregateSlots(std::vector<UtcTime>{}, 45, start - 10min, start + 1h),
               Error);
}

TEST(AggregateSlots, HalfHourPairsSumToHour) {
  CounterRng rng(DeriveKey(3, 0));
  const UtcTime start = ParseTimestamp("2017-05-01T00:00:00Z");
  std::vector<UtcTime> t;
  for (int i = 0; i < 5000; ++i) t.push_back(start + std::chrono::seconds(rng.Below(3 * 86400)));
  const UtcTime end = start + 72h;
  const SlotSeries s30 = AggregateSlots(t, 30, start, end);
  const SlotSeries s60 = AggregateSlots(t, 60, start, end);
  ASSERT_EQ(s30.counts.size(), 2 * s60.counts.size());
  for (std::size_t i = 0; i < s60.counts.size(); ++i) {
    EXPECT_EQ(s60.counts[i], s30.counts[2 * i] + s30.counts[2 * i + 1]);
  }
  EXPECT_EQ(std::accumulate(s30.counts.begin(), s30.counts.end(), 0u), 5000u);
}

TEST(BuildFeatures, LagsAreExact) {
  const UtcTime start = ParseTimestamp("2017-05-01T00:00:00Z");
  std::vector<std::uint32_t> counts(kWeek30 + 96);
  for (std::size_t i = 0; i < counts.size(); ++i) counts[i] = std::uint32_t(i * 7 % 101);
  const SlotSeries s = Series(30, start, counts);
  const auto weather = FlatWeather(start, s.End());
  const FeatureBuild b = BuildFeatures(s, weather, {}, 120);
  const FeatureMatrix& m = b.matrix;
  ASSERT_EQ(m.n_rows, 96u);
  EXPECT_EQ(b.dropped.size(), kWeek30);
  const auto hh = *m.ColumnIndex("hour_history");
  const auto wh = *m.ColumnIndex("week_history");
  for (std::size_t r = 0; r < m.n_rows; ++r) {
    const std::size_t i = kWeek30 + r;
    EXPECT_EQ(m.at(r, hh), counts[i - 2]);
    EXPECT_EQ(m.at(r, wh), counts[i - kWeek30]);
    EXPECT_EQ(m.target[r], counts[i]);
  }
}

TEST(BuildFeatures, TwoSlotHourHistory) {
  const UtcTime start = ParseTimestamp("2017-05-01T00:00:00Z");
  std::vector<std::uint32_t> counts(kWeek30 + 10);
  for (std::size_t i = 0; i < counts.size(); ++i) counts[i] = std::uint32_t(i % 13);
  const SlotSeries s = Series(30, start, counts);
  FeatureOptions opt;
  opt.hour_history_two_slots = true;
  const FeatureMatrix m = BuildFeatures(s, FlatWeather(start, s.End()), {}, 0, opt).matrix;
  const auto hh = *m.ColumnIndex("hour_history");
  for (std::size_t r = 0; r < m.n_rows; ++r) {
    const std::size_t i = kWeek30 + r;
    EXPECT_EQ(m.at(r, hh), double(counts[i - 1] + counts[i - 2]));
  }
}

TEST(BuildFeatures, ConstantSeriesHistory) {
  const UtcTime start = ParseTimestamp("2017-05-01T00:00:00Z");
  const SlotSeries s = Series(60, start, std::vector<std::uint32_t>(24 * 9, 5));
  const FeatureMatrix m = BuildFeatures(s, FlatWeather(start, s.End()), {}, 120).matrix;
  ASSERT_EQ(m.n_rows, 48u);
  for (std::size_t r = 0; r < m.n_rows; ++r) {
    EXPECT_EQ(m.at(r, *m.ColumnIndex("hour_history")), 5);
    EXPECT_EQ(m.at(r, *m.ColumnIndex("week_history")), 5);
  }
}

TEST(BuildFeatures, OneHotGroupsSumToOne) {
  const UtcTime start = ParseTimestamp("2017-05-25T00:00:00Z");
  const SlotSeries s = Series(60, start, std::vector<std::uint32_t>(24 * 14, 1));
  const std::vector<CalendarEntry> cal = {{ParseDate("2017-06-02"), CalendarKind::kHoliday, "Festa"}};
  const FeatureMatrix m = BuildFeatures(s, FlatWeather(start, s.End()), cal, 120).matrix;
  for (const char* g : {"hour_of_the_day", "month", "season", "day_of_week"}) {
    const ColumnGroup* group = m.FindGroup(g);
    ASSERT_NE(group, nullptr) << g;
    EXPECT_FALSE(group->numeric);
    for (std::size_t r = 0; r < m.n_rows; ++r) {
      double sum = 0;
      for (std::size_t c : group->columns) sum += m.at(r, c);
      EXPECT_EQ(sum, 1.0) << g << " row " << r;
    }
  }
  // Local midnight at UTC+2 is 22:00 UTC the previous day.
  const auto hol = *m.ColumnIndex("holiday");
  for (std::size_t r = 0; r < m.n_rows; ++r) {
    const bool expect = LocalDate(m.slot_start[r], 120) == ParseDate("2017-06-02");
    EXPECT_EQ(m.at(r, hol), expect ? 1.0 : 0.0);
  }
  EXPECT_EQ(m.FindGroup("month")->columns.size(), 1u);  // only June survives
}

TEST(BuildFeatures, WeatherGapDropsRow) {
  const UtcTime start = ParseTimestamp("2017-05-01T00:00:00Z");
  const SlotSeries s = Series(60, start, std::vector<std::uint32_t>(24 * 8, 2));
  auto weather = FlatWeather(start, s.End());
  weather.pop_back();
  const FeatureBuild b = BuildFeatures(s, weather, {}, 0);
  EXPECT_EQ(b.matrix.n_rows, 23u);
  EXPECT_EQ(b.dropped.back().reason, "weather-gap");
}

TEST(Split, TenRowsEightyTwenty) {
  const SplitPlan p = ChronologicalSplit(10, ParseSplitRatio("80/20"), 0);
  EXPECT_EQ(p.train.begin, 0u);
  EXPECT_EQ(p.train.end, 8u);
  EXPECT_EQ(p.test.begin, 8u);
  EXPECT_EQ(p.test.end, 10u);
  EXPECT_TRUE(p.cv_folds.empty());
  EXPECT_THROW(ChronologicalSplit(10, ParseSplitRatio("80/20"), 10), Error);
}

TEST(Split, HundredRowsFolds) {
  const SplitPlan p = ChronologicalSplit(100, ParseSplitRatio("90/10"));
  EXPECT_EQ(p.train.size(), 90u);
  EXPECT_EQ(p.test.size(), 10u);
  ASSERT_EQ(p.cv_folds.size(), 10u);
  std::size_t next = 0;
  for (const auto& f : p.cv_folds) {
    EXPECT_EQ(f.size(), 9u);
    EXPECT_EQ(f.begin, next);
    next = f.end;
  }
  EXPECT_EQ(next, p.train.end);
}

TEST(Split, NoLeakageAcrossRatios) {
  for (const char* r : {"90/10", "80/20", "70/30", "60/40"}) {
    for (std::size_t n : {37u, 100u, 8783u}) {
      const SplitPlan p = ChronologicalSplit(n, ParseSplitRatio(r));
      EXPECT_EQ(p.train.end, p.test.begin);
      EXPECT_EQ(p.test.end, n);
      EXPECT_LT(p.train.end - 1, p.test.begin);
      std::size_t covered = 0;
      for (const auto& f : p.cv_folds) covered += f.size();
      EXPECT_EQ(covered, p.train.size());
    }
  }
  EXPECT_THROW(ParseSplitRatio("50/50"), Error);
}

FeatureMatrix SmallMatrix() {
  FeatureMatrix m;
  m.column_names = {"temperature", "hour_07", "week_history"};
  m.n_rows = 4;
  m.values = {10, 1, 0,  //
              20, 0, 5,  //
              30, 1, 10, //
              50, 0, 20};
  m.target = {1, 3, 5, 9};
  m.slot_start.assign(4, UtcTime{});
  InferGroups(m);
  return m;
}

TEST(Scaler, Example) {
  const FeatureMatrix m = SmallMatrix();
  MinMaxScaler s;
  EXPECT_THROW(s.Apply(m), Error);
  s.Fit(m, RowRange{0, 3});
  const FeatureMatrix a = s.Apply(m);
  EXPECT_DOUBLE_EQ(a.at(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(a.at(1, 0), 0.5);
  EXPECT_DOUBLE_EQ(a.at(2, 0), 1.0);
  EXPECT_DOUBLE_EQ(a.at(3, 0), 2.0);  // outside the fitted range is not clipped
  EXPECT_EQ(a.at(0, 1), 1.0);         // dummies untouched
  EXPECT_DOUBLE_EQ(a.target[1], 0.5);
  EXPECT_DOUBLE_EQ(s.InverseTarget(s.ScaleTarget(7.0)), 7.0);
}

TEST(Scaler, RoundTrip) {
  const FeatureMatrix m = SmallMatrix();
  MinMaxScaler s;
  s.Fit(m, RowRange{0, 4});
  const FeatureMatrix back = s.Inverse(s.Apply(m));
  for (std::size_t i = 0; i < m.values.size(); ++i) {
    EXPECT_NEAR(back.values[i], m.values[i], 1e-12);
  }
  for (std::size_t i = 0; i < m.n_rows; ++i) EXPECT_NEAR(back.target[i], m.target[i], 1e-12);
}

TEST(Scaler, ConstantColumnMapsToZero) {
  FeatureMatrix m = SmallMatrix();
  for (std::size_t r = 0; r < m.n_rows; ++r) m.values[r * 3] = 4;
  MinMaxScaler s;
  s.Fit(m, RowRange{0, 4});
  const FeatureMatrix a = s.Apply(m);
  for (std::size_t r = 0; r < m.n_rows; ++r) EXPECT_EQ(a.at(r, 0), 0.0);
}

TEST(Matrix, GroupsAndAlignment) {
  const FeatureMatrix m = SmallMatrix();
  const FeatureMatrix w = m.WithoutGroup("hour_of_the_day");
  EXPECT_EQ(w.column_names, (std::vector<std::string>{"temperature", "week_history"}));
  EXPECT_EQ(w.at(3, 1), 20);
  EXPECT_THROW(m.WithoutGroup("nope"), Error);
  const std::vector<std::string> names = {"week_history", "extra", "temperature"};
  const FeatureMatrix a = m.AlignedTo(names);
  EXPECT_EQ(a.at(2, 0), 10);
  EXPECT_EQ(a.at(2, 1), 0);
  EXPECT_EQ(a.at(2, 2), 30);
}

TEST(FeatureCorrelation, DuplicateAndNoise) {
  CounterRng rng(DeriveKey(11, 1));
  FeatureMatrix m;
  m.column_names = {"copy", "noise", "flat"};
  m.n_rows = 10000;
  for (std::size_t r = 0; r < m.n_rows; ++r) {
    const double y = rng.Normal(50, 10);
    m.target.push_back(y);
    m.values.insert(m.values.end(), {y, rng.Normal(), 1.0});
  }
  InferGroups(m);
  const auto c = FeatureTargetCorrelation(m);
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(c[0].column, "copy");
  EXPECT_NEAR(*c[0].r, 1.0, 1e-12);
  EXPECT_EQ(c[1].column, "noise");
  EXPECT_LT(std::fabs(*c[1].r), 0.05);
  EXPECT_EQ(c[2].column, "flat");
  EXPECT_FALSE(c[2].r.has_value());
}

TEST(FeaturesCsv, RoundTrip) {
  const UtcTime start = ParseTimestamp("2017-05-01T00:00:00Z");
  const SlotSeries s = Series(60, start, std::vector<std::uint32_t>(24 * 8, 3));
  FeatureOptions opt;
  opt.include_wind = true;
  const FeatureMatrix m = BuildFeatures(s, FlatWeather(start, s.End()), {}, 120, opt).matrix;
  const auto path = std::filesystem::path(::testing::TempDir()) / "features_rt.csv";
  {
    std::ofstream out(path);
    WriteFeaturesCsv(out, m);
  }
  const FeatureMatrix back = ReadFeaturesCsv(path);
  EXPECT_EQ(back.column_names, m.column_names);
  EXPECT_EQ(back.values, m.values);
  EXPECT_EQ(back.target, m.target);
  EXPECT_EQ(back.slot_start, m.slot_start);
  EXPECT_EQ(back.width_min, 60);
  ASSERT_EQ(back.groups.size(), m.groups.size());
}

}  // namespace
}  // namespace velotrace
