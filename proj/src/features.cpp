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

#include "velotrace/features.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <nlohmann/json.hpp>
#include <set>

#include "velotrace/csv.hpp"
#include "velotrace/error.hpp"

namespace velotrace {
namespace {

constexpr const char* kDayNames[] = {"monday", "tuesday", "wednesday", "thursday",
                                     "friday", "saturday", "sunday"};
constexpr const char* kSeasons[] = {"spring", "summer", "autumn", "winter"};

int SeasonIndex(int month) {
  if (month >= 3 && month <= 5) return 0;
  if (month >= 6 && month <= 8) return 1;
  if (month >= 9 && month <= 11) return 2;
  return 3;
}

std::string TwoDigits(int v) {
  std::string s = std::to_string(v);
  return v < 10 ? "0" + s : s;
}

bool IsNumericGroup(std::string_view group) {
  return group != "hour_of_the_day" && group != "month" && group != "season" &&
         group != "day_of_week" && group != "holiday";
}

void CheckWidth(int width_min) {
  if (width_min != 30 && width_min != 60) {
    throw Error(ErrorKind::kParameter, "slot width must be 30 or 60 minutes");
  }
}

}  // namespace

SlotSeries AggregateSlots(std::span<const UtcTime> starts, int width_min,
                          UtcTime start, UtcTime end) {
  CheckWidth(width_min);
  const auto width = std::chrono::minutes(width_min);
  if (start.time_since_epoch() % width != std::chrono::seconds(0)) {
    throw Error(ErrorKind::kParameter, "span start not aligned to slot width");
  }
  if (!(end > start)) throw Error(ErrorKind::kParameter, "empty slot span");
  SlotSeries s;
  s.width_min = width_min;
  s.start = start;
  const auto n = (end - start + width - std::chrono::seconds(1)) / width;
  s.counts.assign(std::size_t(n), 0);
  for (UtcTime t : starts) {
    if (t < start || t >= end) {
      ++s.out_of_span;
      continue;
    }
    ++s.counts[std::size_t((t - start) / width)];
  }
  return s;
}

SlotSeries AggregateSlots(std::span<const Trip> trips, int width_min,
                          UtcTime start, UtcTime end) {
  std::vector<UtcTime> starts;
  starts.reserve(trips.size());
  for (const auto& t : trips) starts.push_back(t.start_time);
  return AggregateSlots(starts, width_min, start, end);
}

std::vector<double> FeatureMatrix::Column(std::size_t col) const {
  std::vector<double> out(n_rows);
  for (std::size_t r = 0; r < n_rows; ++r) out[r] = at(r, col);
  return out;
}

std::optional<std::size_t> FeatureMatrix::ColumnIndex(std::string_view name) const {
  const auto it = std::find(column_names.begin(), column_names.end(), name);
  if (it == column_names.end()) return std::nullopt;
  return std::size_t(it - column_names.begin());
}

const ColumnGroup* FeatureMatrix::FindGroup(std::string_view name) const {
  for (const auto& g : groups) {
    if (g.name == name) return &g;
  }
  return nullptr;
}

FeatureMatrix FeatureMatrix::WithoutGroup(std::string_view name) const {
  std::set<std::size_t> drop;
  if (const ColumnGroup* g = FindGroup(name)) {
    drop.insert(g->columns.begin(), g->columns.end());
  } else if (auto c = ColumnIndex(name)) {
    drop.insert(*c);
  } else {
    throw Error(ErrorKind::kParameter, "unknown feature group '" + std::string(name) + "'");
  }
  std::vector<std::string> keep;
  for (std::size_t c = 0; c < n_cols(); ++c) {
    if (!drop.contains(c)) keep.push_back(column_names[c]);
  }
  return AlignedTo(keep);
}

FeatureMatrix FeatureMatrix::WithColumn(const std::string& name,
                                        std::span<const double> column) const {
  if (column.size() != n_rows) {
    throw Error(ErrorKind::kParameter, "column length does not match row count");
  }
  FeatureMatrix out;
  out.width_min = width_min;
  out.column_names = column_names;
  out.column_names.push_back(name);
  out.n_rows = n_rows;
  out.target = target;
  out.slot_start = slot_start;
  out.values.reserve(n_rows * out.n_cols());
  for (std::size_t r = 0; r < n_rows; ++r) {
    const auto src = row(r);
    out.values.insert(out.values.end(), src.begin(), src.end());
    out.values.push_back(column[r]);
  }
  InferGroups(out);
  return out;
}

FeatureMatrix FeatureMatrix::AlignedTo(std::span<const std::string> names) const {
  std::vector<std::optional<std::size_t>> source;
  for (const auto& n : names) source.push_back(ColumnIndex(n));
  FeatureMatrix out;
  out.width_min = width_min;
  out.column_names.assign(names.begin(), names.end());
  out.n_rows = n_rows;
  out.target = target;
  out.slot_start = slot_start;
  out.values.resize(n_rows * names.size(), 0.0);
  for (std::size_t r = 0; r < n_rows; ++r) {
    for (std::size_t c = 0; c < names.size(); ++c) {
      if (source[c]) out.values[r * names.size() + c] = at(r, *source[c]);
    }
  }
  InferGroups(out);
  return out;
}

std::string GroupOfColumn(std::string_view column) {
  auto suffix_digits = [&](std::string_view prefix) {
    if (!column.starts_with(prefix) || column.size() != prefix.size() + 2) return false;
    return std::isdigit((unsigned char)column[prefix.size()]) &&
           std::isdigit((unsigned char)column[prefix.size() + 1]);
  };
  if (suffix_digits("hour_")) return "hour_of_the_day";
  if (column == "hour") return "hour_of_the_day";
  if (suffix_digits("month_")) return "month";
  if (column.starts_with("season_")) return "season";
  if (column.starts_with("dow_")) return "day_of_week";
  return std::string(column);
}

void InferGroups(FeatureMatrix& m) {
  m.groups.clear();
  for (std::size_t c = 0; c < m.column_names.size(); ++c) {
    const std::string g = GroupOfColumn(m.column_names[c]);
    auto it = std::find_if(m.groups.begin(), m.groups.end(),
                           [&](const ColumnGroup& x) { return x.name == g; });
    if (it == m.groups.end()) {
      // A numeric hour is scaled; the 24 dummies are not.
      const bool numeric = IsNumericGroup(g) || m.column_names[c] == "hour";
      m.groups.push_back({g, {c}, numeric});
    } else {
      it->columns.push_back(c);
    }
  }
}

FeatureBuild BuildFeatures(const SlotSeries& slots,
                           std::span<const WeatherRecord> weather,
                           std::span<const CalendarEntry> calendar,
                           int utc_offset_min, const FeatureOptions& options) {
  CheckWidth(slots.width_min);
  const std::size_t hour_lag = std::size_t(60 / slots.width_min);
  const std::size_t week_lag = std::size_t(7 * 24 * 60 / slots.width_min);

  std::map<UtcTime, const WeatherRecord*> weather_at;
  for (const auto& w : weather) weather_at[w.hour] = &w;
  std::map<UtcTime, const PollutionRecord*> pollution_at;
  for (const auto& p : options.pollution) pollution_at[p.hour] = &p;
  std::set<Date> holidays;
  for (const auto& e : calendar) {
    if (e.kind == CalendarKind::kHoliday) holidays.insert(e.date);
  }
  const bool with_pollution = !options.pollution.empty();

  FeatureBuild build;
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < slots.counts.size(); ++i) {
    const UtcTime t = slots.SlotStart(i);
    if (i < week_lag) {
      build.dropped.push_back({t, "insufficient-history"});
      continue;
    }
    const UtcTime hour = FloorToHour(t);
    if (!weather_at.contains(hour)) {
      build.dropped.push_back({t, "weather-gap"});
      continue;
    }
    if (with_pollution) {
      const auto it = pollution_at.find(hour);
      const PollutionRecord* p = it == pollution_at.end() ? nullptr : it->second;
      if (!p || !p->pm || !p->o3 || !p->no2 || !p->so2) {
        build.dropped.push_back({t, "pollution-gap"});
        continue;
      }
    }
    rows.push_back(i);
  }

  std::set<int> months;
  for (std::size_t i : rows) months.insert(MonthNumber(LocalDate(slots.SlotStart(i), utc_offset_min)));

  FeatureMatrix& m = build.matrix;
  m.width_min = slots.width_min;
  auto& names = m.column_names;
  names = {"temperature", "precipitation"};
  if (options.include_wind) names.push_back("wind");
  if (with_pollution) {
    for (const char* p : {"pm", "o3", "no2", "so2"}) names.emplace_back(p);
  }
  const std::size_t hour_col = names.size();
  if (options.numeric_hour) {
    names.emplace_back("hour");
  } else {
    for (int h = 0; h < 24; ++h) names.push_back("hour_" + TwoDigits(h));
  }
  const std::size_t month_col = names.size();
  std::map<int, std::size_t> month_offset;
  for (int mo : months) {
    month_offset[mo] = names.size() - month_col;
    names.push_back("month_" + TwoDigits(mo));
  }
  const std::size_t season_col = names.size();
  for (const char* s : kSeasons) names.push_back(std::string("season_") + s);
  const std::size_t dow_col = names.size();
  for (const char* d : kDayNames) names.push_back(std::string("dow_") + d);
  const std::size_t holiday_col = names.size();
  names.emplace_back("holiday");
  const std::size_t hour_hist_col = names.size();
  names.emplace_back("hour_history");
  const std::size_t week_hist_col = names.size();
  names.emplace_back("week_history");

  const std::size_t nc = names.size();
  m.n_rows = rows.size();
  m.values.assign(m.n_rows * nc, 0.0);
  m.target.resize(m.n_rows);
  m.slot_start.resize(m.n_rows);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::size_t i = rows[r];
    const UtcTime t = slots.SlotStart(i);
    const Date local_day = LocalDate(t, utc_offset_min);
    const int month = MonthNumber(local_day);
    double* v = m.values.data() + r * nc;
    const WeatherRecord& w = *weather_at.at(FloorToHour(t));
    std::size_t c = 0;
    v[c++] = w.temp_c;
    v[c++] = w.precip_mm;
    if (options.include_wind) v[c++] = w.wind_mps;
    if (with_pollution) {
      const PollutionRecord& p = *pollution_at.at(FloorToHour(t));
      v[c++] = *p.pm;
      v[c++] = *p.o3;
      v[c++] = *p.no2;
      v[c++] = *p.so2;
    }
    const int local_hour = LocalHour(t, utc_offset_min);
    if (options.numeric_hour) {
      v[hour_col] = local_hour;
    } else {
      v[hour_col + std::size_t(local_hour)] = 1;
    }
    v[month_col + month_offset.at(month)] = 1;
    v[season_col + std::size_t(SeasonIndex(month))] = 1;
    v[dow_col + std::size_t(WeekdayIndex(local_day))] = 1;
    v[holiday_col] = holidays.contains(local_day) ? 1 : 0;
    if (options.hour_history_two_slots && slots.width_min == 30) {
      v[hour_hist_col] = double(slots.counts[i - 1]) + double(slots.counts[i - 2]);
    } else {
      v[hour_hist_col] = slots.counts[i - hour_lag];
    }
    v[week_hist_col] = slots.counts[i - week_lag];
    m.target[r] = slots.counts[i];
    m.slot_start[r] = t;
  }
  InferGroups(m);
  return build;
}

std::vector<FeatureCorrelation> FeatureTargetCorrelation(const FeatureMatrix& m) {
  if (m.n_rows < 3) {
    throw Error(ErrorKind::kParameter, "feature correlation needs >= 3 rows");
  }
  std::vector<FeatureCorrelation> out;
  for (std::size_t c = 0; c < m.n_cols(); ++c) {
    const auto col = m.Column(c);
    out.push_back({m.column_names[c], Correlate(m.column_names[c], "slot", col, m.target).r});
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.r.has_value() != b.r.has_value()) return a.r.has_value();
    if (!a.r) return false;
    return std::fabs(*a.r) > std::fabs(*b.r);
  });
  return out;
}

std::string SplitRatio::Label() const {
  return std::to_string(train_pct) + "/" + std::to_string(test_pct);
}

SplitRatio ParseSplitRatio(std::string_view text) {
  for (int train : {90, 80, 70, 60}) {
    SplitRatio r{train, 100 - train};
    if (text == r.Label()) return r;
  }
  throw Error(ErrorKind::kParameter,
              "split must be one of 90/10, 80/20, 70/30, 60/40; got '" +
                  std::string(text) + "'");
}

SplitPlan ChronologicalSplit(std::size_t n_rows, SplitRatio ratio, int folds) {
  if (ratio.train_pct + ratio.test_pct != 100 || ratio.test_pct <= 0 ||
      ratio.train_pct <= 0) {
    throw Error(ErrorKind::kParameter, "invalid split ratio");
  }
  if (folds < 0) throw Error(ErrorKind::kParameter, "negative fold count");
  SplitPlan plan;
  plan.ratio = ratio;
  const std::size_t test_n = n_rows * std::size_t(ratio.test_pct) / 100;
  plan.train = {0, n_rows - test_n};
  plan.test = {n_rows - test_n, n_rows};
  if (plan.train.size() < 1) throw Error(ErrorKind::kParameter, "empty training range");
  if (folds > 0) {
    const std::size_t k = std::size_t(folds);
    if (plan.train.size() < k) {
      throw Error(ErrorKind::kParameter,
                  "too few training rows (" + std::to_string(plan.train.size()) +
                      ") for " + std::to_string(k) + " folds");
    }
    const std::size_t base = plan.train.size() / k;
    const std::size_t extra = plan.train.size() % k;
    std::size_t begin = 0;
    for (std::size_t f = 0; f < k; ++f) {
      const std::size_t len = base + (f < extra ? 1 : 0);
      plan.cv_folds.push_back({begin, begin + len});
      begin += len;
    }
  }
  return plan;
}

void MinMaxScaler::Fit(const FeatureMatrix& m, RowRange rows) {
  std::vector<std::size_t> idx(rows.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = rows.begin + i;
  Fit(m, idx);
}

void MinMaxScaler::Fit(const FeatureMatrix& m, std::span<const std::size_t> rows) {
  if (rows.empty()) throw Error(ErrorKind::kParameter, "scaler needs at least one row");
  columns_.clear();
  for (const auto& g : m.groups) {
    if (g.numeric) columns_.insert(columns_.end(), g.columns.begin(), g.columns.end());
  }
  std::sort(columns_.begin(), columns_.end());
  ranges_.assign(columns_.size(), {});
  for (std::size_t k = 0; k < columns_.size(); ++k) {
    double lo = m.at(rows[0], columns_[k]), hi = lo;
    for (std::size_t r : rows) {
      lo = std::min(lo, m.at(r, columns_[k]));
      hi = std::max(hi, m.at(r, columns_[k]));
    }
    ranges_[k] = {lo, hi};
  }
  double lo = m.target[rows[0]], hi = lo;
  for (std::size_t r : rows) {
    lo = std::min(lo, m.target[r]);
    hi = std::max(hi, m.target[r]);
  }
  target_ = {lo, hi};
  fitted_ = true;
}

void MinMaxScaler::RequireFitted() const {
  if (!fitted_) throw Error(ErrorKind::kState, "scaler used before Fit");
}

namespace {
double ScaleValue(double v, MinMaxScaler::Range r) {
  return r.max > r.min ? (v - r.min) / (r.max - r.min) : 0.0;
}
double UnscaleValue(double v, MinMaxScaler::Range r) {
  return r.max > r.min ? r.min + v * (r.max - r.min) : r.min;
}
}  // namespace

FeatureMatrix MinMaxScaler::Apply(const FeatureMatrix& m) const {
  RequireFitted();
  FeatureMatrix out = m;
  for (std::size_t r = 0; r < m.n_rows; ++r) {
    for (std::size_t k = 0; k < columns_.size(); ++k) {
      double& v = out.values[r * m.n_cols() + columns_[k]];
      v = ScaleValue(v, ranges_[k]);
    }
    out.target[r] = ScaleValue(m.target[r], target_);
  }
  return out;
}

FeatureMatrix MinMaxScaler::Inverse(const FeatureMatrix& scaled) const {
  RequireFitted();
  FeatureMatrix out = scaled;
  for (std::size_t r = 0; r < scaled.n_rows; ++r) {
    for (std::size_t k = 0; k < columns_.size(); ++k) {
      double& v = out.values[r * scaled.n_cols() + columns_[k]];
      v = UnscaleValue(v, ranges_[k]);
    }
    out.target[r] = UnscaleValue(scaled.target[r], target_);
  }
  return out;
}

double MinMaxScaler::ScaleTarget(double v) const {
  RequireFitted();
  return ScaleValue(v, target_);
}

double MinMaxScaler::InverseTarget(double v) const {
  RequireFitted();
  return UnscaleValue(v, target_);
}

MinMaxScaler MinMaxScaler::FromParts(std::vector<std::size_t> columns,
                                     std::vector<Range> ranges, Range target) {
  if (columns.size() != ranges.size()) {
    throw Error(ErrorKind::kParameter, "scaler columns and ranges differ in length");
  }
  MinMaxScaler s;
  s.columns_ = std::move(columns);
  s.ranges_ = std::move(ranges);
  s.target_ = target;
  s.fitted_ = true;
  return s;
}

void WriteFeaturesCsv(std::ostream& out, const FeatureMatrix& m) {
  CsvWriter w(out);
  std::vector<std::string> header = m.column_names;
  header.emplace_back("target");
  header.emplace_back("slot_start");
  w.Row(header);
  std::vector<std::string> fields(header.size());
  for (std::size_t r = 0; r < m.n_rows; ++r) {
    for (std::size_t c = 0; c < m.n_cols(); ++c) fields[c] = FormatDouble(m.at(r, c));
    fields[m.n_cols()] = FormatDouble(m.target[r]);
    fields[m.n_cols() + 1] = FormatTimestamp(m.slot_start[r]);
    w.Row(fields);
  }
}

FeatureMatrix ReadFeaturesCsv(const std::filesystem::path& path) {
  CsvReader reader = CsvReader::FromFile(path);
  if (!reader.Next()) throw Error(ErrorKind::kSchema, "features file has no header");
  const std::size_t width = reader.size();
  if (width < 3 || reader[width - 2] != "target" || reader[width - 1] != "slot_start") {
    throw Error(ErrorKind::kSchema, "features header must end with target,slot_start");
  }
  FeatureMatrix m;
  for (std::size_t c = 0; c + 2 < width; ++c) m.column_names.emplace_back(reader[c]);
  while (reader.Next()) {
    const std::string where = "line " + std::to_string(reader.line()) + ": ";
    if (reader.size() != width) throw Error(ErrorKind::kSchema, where + "field count mismatch");
    for (std::size_t c = 0; c + 1 < width; ++c) {
      auto v = ParseDouble(reader[c]);
      if (!v) throw Error(ErrorKind::kInput, where + "non-numeric value");
      (c + 2 < width ? m.values : m.target).push_back(*v);
    }
    auto t = TryParseTimestamp(reader[width - 1]);
    if (!t) throw Error(ErrorKind::kInput, where + "bad slot_start");
    m.slot_start.push_back(*t);
  }
  m.n_rows = m.target.size();
  m.width_min = 60;
  std::optional<std::int64_t> step;
  for (std::size_t r = 1; r < m.n_rows; ++r) {
    const auto d = std::chrono::duration_cast<std::chrono::minutes>(
                       m.slot_start[r] - m.slot_start[r - 1])
                       .count();
    if (d > 0) step = step ? std::min(*step, d) : d;
  }
  if (step == 30) m.width_min = 30;
  InferGroups(m);
  return m;
}

std::string SplitPlanToJson(const SplitPlan& plan) {
  nlohmann::ordered_json j;
  j["ratio"] = plan.ratio.Label();
  j["train_rows"] = {plan.train.begin, plan.train.end};
  j["test_rows"] = {plan.test.begin, plan.test.end};
  nlohmann::ordered_json folds = nlohmann::ordered_json::array();
  for (const auto& f : plan.cv_folds) folds.push_back({f.begin, f.end});
  j["cv_folds"] = folds;
  return j.dump(2) + "\n";
}

}  // namespace velotrace
