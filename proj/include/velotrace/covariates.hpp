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

// Weather, pollution and calendar covariates joined against trip counts.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "velotrace/ingest.hpp"
#include "velotrace/time.hpp"

namespace velotrace {

struct WeatherRecord {
  UtcTime hour;  // truncated to the hour
  double temp_c = 0;
  double precip_mm = 0;  // accumulated over the hour
  double wind_mps = 0;
};

struct PollutionRecord {
  UtcTime hour;
  std::optional<double> pm;
  std::optional<double> o3;
  std::optional<double> no2;
  std::optional<double> so2;
};

enum class CalendarKind { kHoliday, kStrike, kProtest, kEvent };
std::string_view CalendarKindName(CalendarKind kind);

struct CalendarEntry {
  Date date;
  CalendarKind kind = CalendarKind::kHoliday;
  std::string label;
};

// `timestamp,temp_c,precip_mm,wind_mps`; sorted by hour on return.
std::vector<WeatherRecord> ParseWeather(std::string_view csv_text);
std::vector<WeatherRecord> ReadWeatherFile(const std::filesystem::path& path);
void WriteWeather(std::ostream& out, std::span<const WeatherRecord> records);

// `timestamp,pm,o3,no2,so2`, empty = missing.
std::vector<PollutionRecord> ParsePollution(std::string_view csv_text);
std::vector<PollutionRecord> ReadPollutionFile(const std::filesystem::path& path);

// `date,kind,label`.
std::vector<CalendarEntry> ParseCalendar(std::string_view csv_text);
std::vector<CalendarEntry> ReadCalendarFile(const std::filesystem::path& path);
void WriteCalendar(std::ostream& out, std::span<const CalendarEntry> entries);

// Product-moment correlation. Throws Error(kParameter) for length mismatch
// or fewer than 3 samples and Error(kUndefined) when either series is
// constant.
double Pearson(std::span<const double> x, std::span<const double> y);

struct CorrelationReport {
  std::string variable;
  std::string granularity;  // "daily" | "hourly"
  std::optional<double> r;  // nullopt when undefined
  std::size_t n = 0;
};

CorrelationReport Correlate(std::string variable, std::string granularity,
                            std::span<const double> x, std::span<const double> y);

struct DailyRow {
  Date date;
  std::uint64_t trip_count = 0;
  double mean_temp = 0;
  double total_precip = 0;
  double mean_wind = 0;
  int weather_hours = 0;
  bool complete = false;
};

// A day missing more than this many weather hours is incomplete.
inline constexpr int kMaxMissingWeatherHours = 4;

// One row per local date seen on either side, sorted by date. Dates outside
// the observed trip span, or with too few weather hours, are incomplete.
std::vector<DailyRow> DailyJoin(std::span<const Trip> trips,
                                std::span<const WeatherRecord> weather,
                                int utc_offset_min);

struct HourlyRow {
  UtcTime hour;
  std::uint64_t trip_count = 0;
  double temp_c = 0;
  double precip_mm = 0;
  double wind_mps = 0;
};

// Weather hours inside the trip span with the trips starting in each hour.
std::vector<HourlyRow> HourlyJoin(std::span<const Trip> trips,
                                  std::span<const WeatherRecord> weather);

// temp / precip / wind against trip counts at both granularities, using only
// complete daily rows.
std::vector<CorrelationReport> WeatherCorrelations(
    std::span<const DailyRow> daily, std::span<const HourlyRow> hourly);

// Each pollutant against hourly and daily trip counts; missing values are
// skipped per pollutant.
std::vector<CorrelationReport> PollutionCorrelations(
    std::span<const Trip> trips, std::span<const PollutionRecord> pollution,
    int utc_offset_min);

struct WeekdayContrast {
  int weekday = 0;  // Monday = 0
  Date date_a;
  Date date_b;
  std::uint64_t count_a = 0;
  std::uint64_t count_b = 0;
  std::optional<double> ratio;  // count_a / count_b, nullopt when count_b = 0
};

struct HourlyPrecip {
  UtcTime hour;
  double precip_mm = 0;
};

struct WeekContrast {
  std::vector<WeekdayContrast> days;  // Monday..Sunday
  std::vector<HourlyPrecip> precip_a;
};

// Both weeks must be fully present in `daily`, else Error(kParameter) naming
// the missing dates. Week starts are taken as given (any weekday); rows are
// reported Monday..Sunday.
WeekContrast CompareWeeks(std::span<const DailyRow> daily, Date week_a_start,
                          Date week_b_start, std::span<const WeatherRecord> weather,
                          int utc_offset_min);

// The Monday-aligned week with the most precipitation whose following (or
// else preceding) week is also fully present.
std::optional<std::pair<Date, Date>> PickRainyWeek(std::span<const DailyRow> daily);

struct ImpactRow {
  Date date;
  CalendarKind kind = CalendarKind::kHoliday;
  std::string label;
  std::uint64_t count = 0;
  double baseline = 0;
  double drop_fraction = 0;  // negative = increase
};

struct SkippedEntry {
  Date date;
  std::string label;
  std::string reason;
};

struct ImpactReport {
  std::vector<ImpactRow> rows;
  std::vector<SkippedEntry> skipped;
};

// baseline = mean(count[d - 7], count[d + 7]); drop = 1 - count[d] / baseline.
ImpactReport HolidayImpact(std::span<const DailyRow> daily,
                           std::span<const CalendarEntry> calendar);
// Same rule over strike, protest and event entries.
ImpactReport EventImpact(std::span<const DailyRow> daily,
                         std::span<const CalendarEntry> calendar);

std::string CorrelationsToJson(std::span<const CorrelationReport> reports);
std::string WeekContrastToJson(const WeekContrast& contrast);
std::string ImpactToJson(const ImpactReport& report);
void WriteDailyCsv(std::ostream& out, std::span<const DailyRow> daily);

}  // namespace velotrace
