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

#include "velotrace/time.hpp"

#include <cstdio>

#include "velotrace/error.hpp"

namespace velotrace {
namespace {

bool ParseDigits(std::string_view text, std::size_t pos, std::size_t count,
                 int* out) {
  int value = 0;
  for (std::size_t i = pos; i < pos + count; ++i) {
    const char c = text[i];
    if (c < '0' || c > '9') return false;
    value = value * 10 + (c - '0');
  }
  *out = value;
  return true;
}

std::optional<std::chrono::year_month_day> ParseYmd(std::string_view text) {
  int y = 0, m = 0, d = 0;
  if (text.size() < 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  if (!ParseDigits(text, 0, 4, &y) || !ParseDigits(text, 5, 2, &m) ||
      !ParseDigits(text, 8, 2, &d)) {
    return std::nullopt;
  }
  const std::chrono::year_month_day ymd{std::chrono::year{y},
                                        std::chrono::month{unsigned(m)},
                                        std::chrono::day{unsigned(d)}};
  if (!ymd.ok()) return std::nullopt;
  return ymd;
}

}  // namespace

std::optional<UtcTime> TryParseTimestamp(std::string_view text) {
  if (text.size() != 20 || text[10] != 'T' || text[13] != ':' ||
      text[16] != ':' || text[19] != 'Z') {
    return std::nullopt;
  }
  const auto ymd = ParseYmd(text.substr(0, 10));
  if (!ymd) return std::nullopt;
  int hh = 0, mm = 0, ss = 0;
  if (!ParseDigits(text, 11, 2, &hh) || !ParseDigits(text, 14, 2, &mm) ||
      !ParseDigits(text, 17, 2, &ss)) {
    return std::nullopt;
  }
  if (hh > 23 || mm > 59 || ss > 59) return std::nullopt;
  return UtcTime{Date{*ymd}} + std::chrono::hours(hh) +
         std::chrono::minutes(mm) + std::chrono::seconds(ss);
}

UtcTime ParseTimestamp(std::string_view text) {
  if (auto t = TryParseTimestamp(text)) return *t;
  throw Error(ErrorKind::kInput,
              "malformed timestamp '" + std::string(text) + "'");
}

std::string FormatTimestamp(UtcTime t) {
  const Date day = std::chrono::floor<std::chrono::days>(t);
  const std::chrono::year_month_day ymd{day};
  const auto secs = (t - day).count();
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02dZ",
                int(ymd.year()), unsigned(ymd.month()), unsigned(ymd.day()),
                int(secs / 3600), int(secs / 60 % 60), int(secs % 60));
  return buf;
}

std::optional<Date> TryParseDate(std::string_view text) {
  if (text.size() != 10) return std::nullopt;
  const auto ymd = ParseYmd(text);
  if (!ymd) return std::nullopt;
  return Date{*ymd};
}

Date ParseDate(std::string_view text) {
  if (auto d = TryParseDate(text)) return *d;
  throw Error(ErrorKind::kInput, "malformed date '" + std::string(text) + "'");
}

std::string FormatDate(Date d) {
  const std::chrono::year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", int(ymd.year()),
                unsigned(ymd.month()), unsigned(ymd.day()));
  return buf;
}

std::string FormatMonth(std::chrono::year_month ym) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u", int(ym.year()),
                unsigned(ym.month()));
  return buf;
}

int LocalMinuteOfDay(UtcTime t, int offset_min) {
  const UtcTime local = ToLocal(t, offset_min);
  const Date day = std::chrono::floor<std::chrono::days>(local);
  return int((local - day).count() / 60);
}

int LocalHour(UtcTime t, int offset_min) {
  return LocalMinuteOfDay(t, offset_min) / 60;
}

int WeekdayIndex(Date d) {
  return int(std::chrono::weekday{d}.iso_encoding()) - 1;
}

int MonthNumber(Date d) {
  return int(unsigned(std::chrono::year_month_day{d}.month()));
}

std::chrono::year_month YearMonth(Date d) {
  const std::chrono::year_month_day ymd{d};
  return ymd.year() / ymd.month();
}

}  // namespace velotrace
