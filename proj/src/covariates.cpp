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

#include "velotrace/covariates.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <nlohmann/json.hpp>
#include <set>
#include <tuple>

#include "velotrace/csv.hpp"
#include "velotrace/error.hpp"

namespace velotrace {
namespace {

std::string Where(std::size_t line) { return "line " + std::to_string(line) + ": "; }

UtcTime HourField(const CsvReader& r, std::size_t i) {
  auto t = TryParseTimestamp(r[i]);
  if (!t) {
    throw Error(ErrorKind::kInput,
                Where(r.line()) + "malformed timestamp '" + std::string(r[i]) + "'");
  }
  return FloorToHour(*t);
}

double RequiredNumber(const CsvReader& r, std::size_t i, std::string_view name) {
  auto v = ParseDouble(r[i]);
  if (!v) {
    throw Error(ErrorKind::kInput, Where(r.line()) + "bad " + std::string(name) +
                                       " '" + std::string(r[i]) + "'");
  }
  return *v;
}

std::optional<double> OptionalNonNegative(const CsvReader& r, std::size_t i,
                                          std::string_view name) {
  if (r[i].empty()) return std::nullopt;
  const double v = RequiredNumber(r, i, name);
  if (v < 0) {
    throw Error(ErrorKind::kRange, Where(r.line()) + "negative " + std::string(name));
  }
  return v;
}

std::optional<CalendarKind> KindFromName(std::string_view name) {
  if (name == "holiday") return CalendarKind::kHoliday;
  if (name == "strike") return CalendarKind::kStrike;
  if (name == "protest") return CalendarKind::kProtest;
  if (name == "event") return CalendarKind::kEvent;
  return std::nullopt;
}

nlohmann::ordered_json OptionalJson(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

ImpactReport Impact(std::span<const DailyRow> daily,
                    std::span<const CalendarEntry> calendar,
                    bool (*selected)(CalendarKind)) {
  std::map<Date, std::uint64_t> counts;
  for (const auto& row : daily) counts[row.date] = row.trip_count;
  ImpactReport report;
  for (const auto& entry : calendar) {
    if (!selected(entry.kind)) continue;
    const auto day = counts.find(entry.date);
    const auto before = counts.find(entry.date - std::chrono::days(7));
    const auto after = counts.find(entry.date + std::chrono::days(7));
    if (day == counts.end()) {
      report.skipped.push_back({entry.date, entry.label, "no data for date"});
      continue;
    }
    if (before == counts.end() || after == counts.end()) {
      report.skipped.push_back(
          {entry.date, entry.label,
           before == counts.end() ? "missing flank one week before"
                                  : "missing flank one week after"});
      continue;
    }
    const double baseline = 0.5 * (double(before->second) + double(after->second));
    if (baseline <= 0) {
      report.skipped.push_back({entry.date, entry.label, "zero baseline"});
      continue;
    }
    report.rows.push_back({entry.date, entry.kind, entry.label, day->second,
                           baseline, 1.0 - double(day->second) / baseline});
  }
  return report;
}

}  // namespace

std::string_view CalendarKindName(CalendarKind kind) {
  switch (kind) {
    case CalendarKind::kHoliday: return "holiday";
    case CalendarKind::kStrike: return "strike";
    case CalendarKind::kProtest: return "protest";
    case CalendarKind::kEvent: return "event";
  }
  return "unknown";
}

std::vector<WeatherRecord> ParseWeather(std::string_view csv_text) {
  CsvReader r{std::string(csv_text)};
  r.ExpectHeader({"timestamp", "temp_c", "precip_mm", "wind_mps"});
  std::vector<WeatherRecord> out;
  while (r.Next()) {
    if (r.size() != 4) throw Error(ErrorKind::kSchema, Where(r.line()) + "expected 4 fields");
    WeatherRecord w;
    w.hour = HourField(r, 0);
    w.temp_c = RequiredNumber(r, 1, "temp_c");
    w.precip_mm = RequiredNumber(r, 2, "precip_mm");
    w.wind_mps = RequiredNumber(r, 3, "wind_mps");
    if (w.precip_mm < 0 || w.wind_mps < 0) {
      throw Error(ErrorKind::kRange, Where(r.line()) + "negative precipitation or wind");
    }
    out.push_back(w);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.hour < b.hour; });
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (out[i].hour == out[i - 1].hour) {
      throw Error(ErrorKind::kSchema,
                  "duplicate weather hour " + FormatTimestamp(out[i].hour));
    }
  }
  return out;
}

std::vector<WeatherRecord> ReadWeatherFile(const std::filesystem::path& path) {
  return ParseWeather(ReadFile(path));
}

void WriteWeather(std::ostream& out, std::span<const WeatherRecord> records) {
  CsvWriter w(out);
  w.Row({"timestamp", "temp_c", "precip_mm", "wind_mps"});
  for (const auto& r : records) {
    w.Row({FormatTimestamp(r.hour), FormatDouble(r.temp_c),
           FormatDouble(r.precip_mm), FormatDouble(r.wind_mps)});
  }
}

std::vector<PollutionRecord> ParsePollution(std::string_view csv_text) {
  CsvReader r{std::string(csv_text)};
  r.ExpectHeader({"timestamp", "pm", "o3", "no2", "so2"});
  std::vector<PollutionRecord> out;
  while (r.Next()) {
    if (r.size() != 5) throw Error(ErrorKind::kSchema, Where(r.line()) + "expected 5 fields");
    PollutionRecord p;
    p.hour = HourField(r, 0);
    p.pm = OptionalNonNegative(r, 1, "pm");
    p.o3 = OptionalNonNegative(r, 2, "o3");
    p.no2 = OptionalNonNegative(r, 3, "no2");
    p.so2 = OptionalNonNegative(r, 4, "so2");
    out.push_back(p);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.hour < b.hour; });
  return out;
}

std::vector<PollutionRecord> ReadPollutionFile(const std::filesystem::path& path) {
  return ParsePollution(ReadFile(path));
}

std::vector<CalendarEntry> ParseCalendar(std::string_view csv_text) {
  CsvReader r{std::string(csv_text)};
  r.ExpectHeader({"date", "kind", "label"});
  std::vector<CalendarEntry> out;
  std::set<std::tuple<Date, CalendarKind, std::string>> seen;
  while (r.Next()) {
    if (r.size() != 3) throw Error(ErrorKind::kSchema, Where(r.line()) + "expected 3 fields");
    auto date = TryParseDate(r[0]);
    if (!date) throw Error(ErrorKind::kInput, Where(r.line()) + "malformed date");
    auto kind = KindFromName(r[1]);
    if (!kind) {
      throw Error(ErrorKind::kSchema,
                  Where(r.line()) + "unknown kind '" + std::string(r[1]) + "'");
    }
    CalendarEntry e{*date, *kind, std::string(r[2])};
    if (!seen.insert({e.date, e.kind, e.label}).second) {
      throw Error(ErrorKind::kSchema, Where(r.line()) + "duplicate calendar entry");
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<CalendarEntry> ReadCalendarFile(const std::filesystem::path& path) {
  return ParseCalendar(ReadFile(path));
}

void WriteCalendar(std::ostream& out, std::span<const CalendarEntry> entries) {
  CsvWriter w(out);
  w.Row({"date", "kind", "label"});
  for (const auto& e : entries) {
    w.Row({FormatDate(e.date), CalendarKindName(e.kind), e.label});
  }
}

double Pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorKind::kParameter, "pearson: series lengths differ");
  }
  if (x.size() < 3) throw Error(ErrorKind::kParameter, "pearson: need >= 3 samples");
  const double n = double(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0 || syy <= 0) {
    throw Error(ErrorKind::kUndefined, "pearson: zero variance");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

CorrelationReport Correlate(std::string variable, std::string granularity,
                            std::span<const double> x, std::span<const double> y) {
  CorrelationReport rep{std::move(variable), std::move(granularity), std::nullopt,
                        x.size()};
  if (x.size() < 3) return rep;
  try {
    rep.r = Pearson(x, y);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kUndefined) throw;
  }
  return rep;
}

std::vector<DailyRow> DailyJoin(std::span<const Trip> trips,
                                std::span<const WeatherRecord> weather,
                                int utc_offset_min) {
  std::map<Date, DailyRow> rows;
  auto row_for = [&](Date d) -> DailyRow& {
    auto& row = rows[d];
    row.date = d;
    return row;
  };
  std::optional<Date> first_trip, last_trip;
  for (const auto& t : trips) {
    const Date d = LocalDate(t.start_time, utc_offset_min);
    ++row_for(d).trip_count;
    first_trip = first_trip ? std::min(*first_trip, d) : d;
    last_trip = last_trip ? std::max(*last_trip, d) : d;
  }
  for (const auto& w : weather) {
    DailyRow& row = row_for(LocalDate(w.hour, utc_offset_min));
    ++row.weather_hours;
    row.mean_temp += w.temp_c;
    row.total_precip += w.precip_mm;
    row.mean_wind += w.wind_mps;
  }
  std::vector<DailyRow> out;
  out.reserve(rows.size());
  for (auto& [date, row] : rows) {
    if (row.weather_hours > 0) {
      row.mean_temp /= row.weather_hours;
      row.mean_wind /= row.weather_hours;
    }
    const bool in_trip_span = first_trip && date >= *first_trip && date <= *last_trip;
    row.complete = in_trip_span && row.weather_hours >= 24 - kMaxMissingWeatherHours;
    out.push_back(row);
  }
  return out;
}

std::vector<HourlyRow> HourlyJoin(std::span<const Trip> trips,
                                  std::span<const WeatherRecord> weather) {
  if (trips.empty()) return {};
  std::map<UtcTime, std::uint64_t> counts;
  UtcTime lo = trips.front().start_time, hi = lo;
  for (const auto& t : trips) {
    ++counts[FloorToHour(t.start_time)];
    lo = std::min(lo, t.start_time);
    hi = std::max(hi, t.start_time);
  }
  lo = FloorToHour(lo);
  std::vector<HourlyRow> out;
  for (const auto& w : weather) {
    if (w.hour < lo || w.hour > hi) continue;
    const auto it = counts.find(w.hour);
    out.push_back({w.hour, it == counts.end() ? 0 : it->second, w.temp_c,
                   w.precip_mm, w.wind_mps});
  }
  return out;
}

std::vector<CorrelationReport> WeatherCorrelations(std::span<const DailyRow> daily,
                                                   std::span<const HourlyRow> hourly) {
  std::vector<double> dc, dt, dp, dw;
  for (const auto& r : daily) {
    if (!r.complete) continue;
    dc.push_back(double(r.trip_count));
    dt.push_back(r.mean_temp);
    dp.push_back(r.total_precip);
    dw.push_back(r.mean_wind);
  }
  std::vector<double> hc, ht, hp, hw;
  for (const auto& r : hourly) {
    hc.push_back(double(r.trip_count));
    ht.push_back(r.temp_c);
    hp.push_back(r.precip_mm);
    hw.push_back(r.wind_mps);
  }
  return {Correlate("temperature", "daily", dt, dc),
          Correlate("precipitation", "daily", dp, dc),
          Correlate("wind", "daily", dw, dc),
          Correlate("temperature", "hourly", ht, hc),
          Correlate("precipitation", "hourly", hp, hc),
          Correlate("wind", "hourly", hw, hc)};
}

std::vector<CorrelationReport> PollutionCorrelations(
    std::span<const Trip> trips, std::span<const PollutionRecord> pollution,
    int utc_offset_min) {
  std::map<UtcTime, std::uint64_t> hourly_trips;
  std::map<Date, std::uint64_t> daily_trips;
  for (const auto& t : trips) {
    ++hourly_trips[FloorToHour(t.start_time)];
    ++daily_trips[LocalDate(t.start_time, utc_offset_min)];
  }
  using Field = std::optional<double> PollutionRecord::*;
  const std::pair<const char*, Field> fields[] = {{"pm", &PollutionRecord::pm},
                                                  {"o3", &PollutionRecord::o3},
                                                  {"no2", &PollutionRecord::no2},
                                                  {"so2", &PollutionRecord::so2}};
  std::vector<CorrelationReport> out;
  for (const auto& [name, field] : fields) {
    std::vector<double> hx, hy;
    std::map<Date, std::pair<double, int>> per_day;
    for (const auto& p : pollution) {
      const auto& v = p.*field;
      if (!v) continue;
      const auto it = hourly_trips.find(p.hour);
      hx.push_back(*v);
      hy.push_back(it == hourly_trips.end() ? 0.0 : double(it->second));
      auto& acc = per_day[LocalDate(p.hour, utc_offset_min)];
      acc.first += *v;
      ++acc.second;
    }
    std::vector<double> dx, dy;
    for (const auto& [date, acc] : per_day) {
      const auto it = daily_trips.find(date);
      if (it == daily_trips.end()) continue;
      dx.push_back(acc.first / acc.second);
      dy.push_back(double(it->second));
    }
    out.push_back(Correlate(name, "daily", dx, dy));
    out.push_back(Correlate(name, "hourly", hx, hy));
  }
  return out;
}

WeekContrast CompareWeeks(std::span<const DailyRow> daily, Date week_a_start,
                          Date week_b_start, std::span<const WeatherRecord> weather,
                          int utc_offset_min) {
  std::map<Date, std::uint64_t> counts;
  for (const auto& r : daily) counts[r.date] = r.trip_count;
  std::string missing;
  for (Date start : {week_a_start, week_b_start}) {
    for (int k = 0; k < 7; ++k) {
      const Date d = start + std::chrono::days(k);
      if (!counts.contains(d)) missing += (missing.empty() ? "" : ", ") + FormatDate(d);
    }
  }
  if (!missing.empty()) {
    throw Error(ErrorKind::kParameter, "partial week; missing dates: " + missing);
  }
  WeekContrast c;
  c.days.resize(7);
  for (int k = 0; k < 7; ++k) {
    const Date a = week_a_start + std::chrono::days(k);
    const Date b = week_b_start + std::chrono::days(k);
    WeekdayContrast row;
    row.weekday = WeekdayIndex(a);
    row.date_a = a;
    row.date_b = b;
    row.count_a = counts[a];
    row.count_b = counts[b];
    if (row.count_b > 0) row.ratio = double(row.count_a) / double(row.count_b);
    c.days[std::size_t(row.weekday)] = row;
  }
  for (const auto& w : weather) {
    const Date d = LocalDate(w.hour, utc_offset_min);
    if (d >= week_a_start && d < week_a_start + std::chrono::days(7)) {
      c.precip_a.push_back({w.hour, w.precip_mm});
    }
  }
  return c;
}

std::optional<std::pair<Date, Date>> PickRainyWeek(std::span<const DailyRow> daily) {
  std::map<Date, const DailyRow*> by_date;
  for (const auto& r : daily) by_date[r.date] = &r;
  auto full_week = [&](Date start) {
    for (int k = 0; k < 7; ++k) {
      if (!by_date.contains(start + std::chrono::days(k))) return false;
    }
    return true;
  };
  std::optional<std::pair<Date, Date>> best;
  double best_precip = -1;
  for (const auto& [date, row] : by_date) {
    if (WeekdayIndex(date) != 0 || !full_week(date)) continue;
    Date other = date + std::chrono::days(7);
    if (!full_week(other)) {
      other = date - std::chrono::days(7);
      if (!full_week(other)) continue;
    }
    double precip = 0;
    for (int k = 0; k < 7; ++k) precip += by_date[date + std::chrono::days(k)]->total_precip;
    if (precip > best_precip) {
      best_precip = precip;
      best = std::pair{date, other};
    }
  }
  return best;
}

ImpactReport HolidayImpact(std::span<const DailyRow> daily,
                           std::span<const CalendarEntry> calendar) {
  return Impact(daily, calendar,
                [](CalendarKind k) { return k == CalendarKind::kHoliday; });
}

ImpactReport EventImpact(std::span<const DailyRow> daily,
                         std::span<const CalendarEntry> calendar) {
  return Impact(daily, calendar,
                [](CalendarKind k) { return k != CalendarKind::kHoliday; });
}

std::string CorrelationsToJson(std::span<const CorrelationReport> reports) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : reports) {
    arr.push_back({{"variable", r.variable},
                   {"granularity", r.granularity},
                   {"r", OptionalJson(r.r)},
                   {"n", r.n}});
  }
  return arr.dump(2) + "\n";
}

std::string WeekContrastToJson(const WeekContrast& c) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json days = nlohmann::ordered_json::array();
  for (const auto& d : c.days) {
    days.push_back({{"weekday", d.weekday},
                    {"date_a", FormatDate(d.date_a)},
                    {"date_b", FormatDate(d.date_b)},
                    {"count_a", d.count_a},
                    {"count_b", d.count_b},
                    {"ratio", OptionalJson(d.ratio)}});
  }
  j["days"] = days;
  nlohmann::ordered_json precip = nlohmann::ordered_json::array();
  for (const auto& p : c.precip_a) {
    precip.push_back({{"hour", FormatTimestamp(p.hour)}, {"precip_mm", p.precip_mm}});
  }
  j["precip_week_a"] = precip;
  return j.dump(2) + "\n";
}

std::string ImpactToJson(const ImpactReport& report) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"date", FormatDate(r.date)},
                    {"kind", CalendarKindName(r.kind)},
                    {"label", r.label},
                    {"count", r.count},
                    {"baseline", r.baseline},
                    {"drop_fraction", r.drop_fraction}});
  }
  j["impacts"] = rows;
  nlohmann::ordered_json skipped = nlohmann::ordered_json::array();
  for (const auto& s : report.skipped) {
    skipped.push_back(
        {{"date", FormatDate(s.date)}, {"label", s.label}, {"reason", s.reason}});
  }
  j["skipped"] = skipped;
  return j.dump(2) + "\n";
}

void WriteDailyCsv(std::ostream& out, std::span<const DailyRow> daily) {
  CsvWriter w(out);
  w.Row({"date", "trip_count", "mean_temp", "total_precip", "mean_wind",
         "weather_hours", "complete"});
  for (const auto& r : daily) {
    w.Row({FormatDate(r.date), std::to_string(r.trip_count), FormatDouble(r.mean_temp),
           FormatDouble(r.total_precip), FormatDouble(r.mean_wind),
           std::to_string(r.weather_hours), r.complete ? "1" : "0"});
  }
}

}  // namespace velotrace
