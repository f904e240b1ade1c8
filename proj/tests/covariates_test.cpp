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

#include "velotrace/covariates.hpp"
#include "velotrace/error.hpp"
#include "velotrace/rng.hpp"

namespace velotrace {
namespace {

using namespace std::chrono;

TEST(Pearson, Examples) {
  EXPECT_NEAR(Pearson(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 3}), 1.0, 1e-15);
  EXPECT_NEAR(Pearson(std::vector<double>{1, 2, 3}, std::vector<double>{3, 2, 1}), -1.0, 1e-15);
  // cov 3 / (sqrt(5) sqrt(5)) in centered sums.
  EXPECT_NEAR(Pearson(std::vector<double>{1, 2, 3, 4}, std::vector<double>{2, 1, 4, 3}), 0.6, 1e-12);
}

TEST(Pearson, Errors) {
  try {
    Pearson(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kUndefined);
  }
  EXPECT_THROW(Pearson(std::vector<double>{1, 2}, std::vector<double>{1, 2}), Error);
  EXPECT_THROW(Pearson(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2}), Error);
  const auto r = Correlate("temp", "daily", std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3});
  EXPECT_FALSE(r.r.has_value());
  EXPECT_EQ(r.n, 3u);
}

TEST(Pearson, SymmetryAndAffineInvariance) {
  CounterRng rng(DeriveKey(31, 0));
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 3 + rng.Below(50);
    std::vector<double> x(n), y(n), ax(n), by(n);
    const double a = rng.Uniform(0.1, 10), b = rng.Uniform(-100, 100);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = rng.Normal();
      y[i] = 0.5 * x[i] + rng.Normal();
      ax[i] = a * x[i] + b;
      by[i] = 3 * y[i] - 7;
    }
    const double r = Pearson(x, y);
    EXPECT_GE(r, -1);
    EXPECT_LE(r, 1);
    EXPECT_NEAR(r, Pearson(y, x), 1e-12);
    EXPECT_NEAR(r, Pearson(ax, by), 1e-9);
  }
}

std::vector<WeatherRecord> FlatWeather(Date day, int hours, double temp) {
  std::vector<WeatherRecord> w;
  const UtcTime start = UtcTime(day) - minutes(120);
  for (int h = 0; h < hours; ++h) w.push_back({start + std::chrono::hours(h), temp, 0.5, 2});
  return w;
}

Trip TripAt(UtcTime t) {
  Trip trip;
  trip.start_time = t;
  trip.end_time = t + seconds(300);
  return trip;
}

TEST(DailyJoin, AggregatesAndFlagsGaps) {
  const Date d = ParseDate("2017-05-09");
  const UtcTime noon = UtcTime(d) + hours(10);
  std::vector<Trip> trips = {TripAt(noon), TripAt(noon + hours(1)),
                             TripAt(noon + days(1))};
  const auto rows = DailyJoin(trips, FlatWeather(d, 24, 15), 120);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].trip_count, 2u);
  EXPECT_DOUBLE_EQ(rows[0].mean_temp, 15);
  EXPECT_DOUBLE_EQ(rows[0].total_precip, 12);
  EXPECT_TRUE(rows[0].complete);
  EXPECT_EQ(rows[1].trip_count, 1u);
  EXPECT_FALSE(rows[1].complete);
  std::uint64_t total = 0;
  for (const auto& r : rows) total += r.trip_count;
  EXPECT_EQ(total, trips.size());
  // 19 weather hours is one short of the threshold.
  EXPECT_FALSE(DailyJoin(trips, FlatWeather(d, 19, 15), 120)[0].complete);
  EXPECT_TRUE(DailyJoin(trips, FlatWeather(d, 20, 15), 120)[0].complete);
}

std::vector<DailyRow> Days(Date first, std::vector<std::uint64_t> counts) {
  std::vector<DailyRow> rows;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    DailyRow r;
    r.date = first + days(i);
    r.trip_count = counts[i];
    r.weather_hours = 24;
    r.complete = true;
    rows.push_back(r);
  }
  return rows;
}

TEST(HolidayImpact, BaselineRule) {
  const Date first = ParseDate("2017-08-08");
  std::vector<std::uint64_t> counts(15, 100);
  counts[7] = 40;
  const auto daily = Days(first, counts);
  const std::vector<CalendarEntry> cal = {{first + days(7), CalendarKind::kHoliday, "Assumption"},
                                          {first + days(3), CalendarKind::kHoliday, "edge"},
                                          {first + days(7), CalendarKind::kStrike, "strike"}};
  const ImpactReport r = HolidayImpact(daily, cal);
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_DOUBLE_EQ(r.rows[0].baseline, 100);
  EXPECT_DOUBLE_EQ(r.rows[0].drop_fraction, 0.6);
  ASSERT_EQ(r.skipped.size(), 1u);
  EXPECT_EQ(r.skipped[0].label, "edge");
  const ImpactReport ev = EventImpact(daily, cal);
  ASSERT_EQ(ev.rows.size(), 1u);
  EXPECT_EQ(ev.rows[0].label, "strike");
}

TEST(HolidayImpact, EqualFlanksAndScaleInvariance) {
  const Date first = ParseDate("2017-04-10");
  const std::vector<CalendarEntry> cal = {{first + days(7), CalendarKind::kHoliday, "h"}};
  EXPECT_EQ(HolidayImpact(Days(first, std::vector<std::uint64_t>(15, 70)), cal).rows[0].drop_fraction, 0);
  CounterRng rng(DeriveKey(31, 1));
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::uint64_t> counts(15), scaled(15);
    const std::uint64_t c = 1 + rng.Below(9);
    for (std::size_t i = 0; i < 15; ++i) {
      counts[i] = 1 + rng.Below(500);
      scaled[i] = counts[i] * c;
    }
    EXPECT_NEAR(HolidayImpact(Days(first, counts), cal).rows[0].drop_fraction,
                HolidayImpact(Days(first, scaled), cal).rows[0].drop_fraction, 1e-12);
  }
}

TEST(WeekContrast, Ratios) {
  const Date monday = ParseDate("2017-05-08");
  std::vector<std::uint64_t> counts(14, 100);
  counts[1] = 45;
  const auto daily = Days(monday, counts);
  const WeekContrast wc = CompareWeeks(daily, monday, monday + days(7), {}, 120);
  ASSERT_EQ(wc.days.size(), 7u);
  EXPECT_DOUBLE_EQ(*wc.days[1].ratio, 0.45);
  EXPECT_DOUBLE_EQ(*wc.days[0].ratio, 1.0);
  EXPECT_THROW(CompareWeeks(daily, monday, monday + days(14), {}, 120), Error);
}

TEST(WeekContrast, IdenticalWeeksGiveUnitRatios) {
  const Date monday = ParseDate("2017-05-08");
  const auto daily = Days(monday, std::vector<std::uint64_t>(14, 33));
  for (const auto& d : CompareWeeks(daily, monday, monday + days(7), {}, 120).days) {
    EXPECT_EQ(*d.ratio, 1.0);
  }
}

TEST(CovariateFiles, ParseAndReject) {
  const auto w = ParseWeather(
      "timestamp,temp_c,precip_mm,wind_mps\n2017-05-09T09:00:00Z,20,0,3\n"
      "2017-05-09T08:30:00Z,19,1.5,2\n");
  ASSERT_EQ(w.size(), 2u);
  EXPECT_EQ(w[0].hour, ParseTimestamp("2017-05-09T08:00:00Z"));
  EXPECT_THROW(ParseWeather("timestamp,temp_c,precip_mm,wind_mps\n"
                            "2017-05-09T08:00:00Z,1,0,1\n2017-05-09T08:10:00Z,1,0,1\n"),
               Error);
  const auto p = ParsePollution("timestamp,pm,o3,no2,so2\n2017-05-09T08:00:00Z,10,,30,\n");
  ASSERT_EQ(p.size(), 1u);
  EXPECT_EQ(*p[0].pm, 10);
  EXPECT_FALSE(p[0].o3.has_value());
  const auto c = ParseCalendar("date,kind,label\n2017-08-15,holiday,Assumption\n");
  EXPECT_EQ(c[0].kind, CalendarKind::kHoliday);
  EXPECT_THROW(ParseCalendar("date,kind,label\n2017-08-15,party,x\n"), Error);
}

}  // namespace
}  // namespace velotrace
