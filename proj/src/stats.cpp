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

#include "velotrace/stats.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>

#include "velotrace/csv.hpp"
#include "velotrace/error.hpp"

namespace velotrace {

std::optional<double> Histogram::ModeLowerEdge() const {
  std::optional<double> edge;
  std::uint64_t best = 0;
  for (const auto& [lower, count] : bins) {
    if (count > best) {
      best = count;
      edge = lower;
    }
  }
  return edge;
}

Histogram BuildHistogram(std::span<const double> values, double bin_width,
                         double origin) {
  if (!(bin_width > 0) || !std::isfinite(bin_width)) {
    throw Error(ErrorKind::kParameter, "bin width must be positive");
  }
  Histogram h;
  h.bin_width = bin_width;
  h.origin = origin;
  if (values.empty()) return h;

  std::vector<long long> index(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw Error(ErrorKind::kInput, "non-finite histogram value");
    }
    index[i] = static_cast<long long>(std::floor((values[i] - origin) / bin_width));
  }
  const auto [lo, hi] = std::minmax_element(index.begin(), index.end());
  const long long first = *lo;
  std::vector<std::uint64_t> counts(std::size_t(*hi - first + 1), 0);
  for (long long k : index) ++counts[std::size_t(k - first)];
  h.bins.reserve(counts.size());
  for (std::size_t k = 0; k < counts.size(); ++k) {
    h.bins.emplace_back(origin + double(first + (long long)k) * bin_width,
                        counts[k]);
  }
  h.total = values.size();
  return h;
}

double ShareBelow(std::span<const double> values, double threshold) {
  if (values.empty()) return 0;
  const auto n = std::count_if(values.begin(), values.end(),
                               [&](double v) { return v < threshold; });
  return double(n) / double(values.size());
}

std::optional<double> Median(std::span<const double> values) {
  if (values.empty()) return std::nullopt;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  return n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

void WriteHistogramCsv(std::ostream& out, const Histogram& h) {
  CsvWriter w(out);
  w.Row({"lower_edge", "count"});
  for (const auto& [lower, count] : h.bins) {
    w.Row({FormatDouble(lower), std::to_string(count)});
  }
}

TemporalProfile BuildTemporalProfile(std::span<const Trip> trips,
                                     int utc_offset_min) {
  if (trips.empty()) {
    throw Error(ErrorKind::kParameter, "temporal profile needs at least one trip");
  }
  TemporalProfile p;
  for (const auto& trip : trips) {
    const Date day = LocalDate(trip.start_time, utc_offset_min);
    const int wd = WeekdayIndex(day);
    const int hour = LocalHour(trip.start_time, utc_offset_min);
    ++p.weekday_counts[std::size_t(wd)];
    ++(wd < 5 ? p.hourly_weekday : p.hourly_weekend)[std::size_t(hour)];
    ++p.monthly_counts[YearMonth(day)];
  }
  p.total = trips.size();
  std::uint64_t working = 0;
  for (int d = 0; d < 5; ++d) working += p.weekday_counts[std::size_t(d)];
  p.workingday_share = double(working) / double(p.total);
  return p;
}

std::vector<MonthChange> MonthlyChange(const TemporalProfile& profile) {
  if (profile.monthly_counts.size() < 2) {
    throw Error(ErrorKind::kParameter, "monthly change needs at least 2 months");
  }
  std::uint64_t peak = 0;
  for (const auto& [_, c] : profile.monthly_counts) peak = std::max(peak, c);
  std::vector<MonthChange> out;
  for (const auto& [month, count] : profile.monthly_counts) {
    MonthChange m;
    m.month = month;
    m.count = count;
    const auto prev = profile.monthly_counts.find(month - std::chrono::months(1));
    if (prev != profile.monthly_counts.end() && prev->second > 0) {
      m.pct_change = (double(count) - double(prev->second)) / double(prev->second);
    }
    m.share_of_peak = peak > 0 ? double(count) / double(peak) : 0;
    out.push_back(m);
  }
  return out;
}

std::string ProfileToJson(const TemporalProfile& profile) {
  nlohmann::ordered_json j;
  static constexpr const char* kDays[] = {"Monday", "Tuesday", "Wednesday",
                                          "Thursday", "Friday", "Saturday",
                                          "Sunday"};
  nlohmann::ordered_json weekdays;
  for (std::size_t d = 0; d < 7; ++d) weekdays[kDays[d]] = profile.weekday_counts[d];
  j["weekday_counts"] = weekdays;
  j["hourly_weekday"] = profile.hourly_weekday;
  j["hourly_weekend"] = profile.hourly_weekend;
  nlohmann::ordered_json months = nlohmann::ordered_json::object();
  for (const auto& [m, c] : profile.monthly_counts) months[FormatMonth(m)] = c;
  j["monthly_counts"] = months;
  j["workingday_share"] = profile.workingday_share;
  j["total"] = profile.total;
  return j.dump(2) + "\n";
}

void WriteMonthlyCsv(std::ostream& out, std::span<const MonthChange> months) {
  CsvWriter w(out);
  w.Row({"month", "count", "pct_change", "share_of_peak"});
  for (const auto& m : months) {
    w.Row({FormatMonth(m.month), std::to_string(m.count),
           m.pct_change ? FormatDouble(*m.pct_change) : std::string("undefined"),
           FormatDouble(m.share_of_peak)});
  }
}

}  // namespace velotrace
