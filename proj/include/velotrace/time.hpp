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

// UTC instants at one-second resolution and the fixed-offset local calendar
// helpers shared by every analysis stage.

#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace velotrace {

using UtcTime = std::chrono::sys_seconds;
using Date = std::chrono::sys_days;

// Strict `YYYY-MM-DDThh:mm:ssZ`. Returns nullopt on any deviation.
std::optional<UtcTime> TryParseTimestamp(std::string_view text);
// Throws Error(kInput) on malformed text.
UtcTime ParseTimestamp(std::string_view text);
std::string FormatTimestamp(UtcTime t);

// Strict `YYYY-MM-DD`.
std::optional<Date> TryParseDate(std::string_view text);
Date ParseDate(std::string_view text);
std::string FormatDate(Date d);

// `YYYY-MM` label for a calendar month.
std::string FormatMonth(std::chrono::year_month ym);

// Local wall-clock view of a UTC instant under a fixed offset in minutes.
inline UtcTime ToLocal(UtcTime t, int offset_min) {
  return t + std::chrono::minutes(offset_min);
}
inline Date LocalDate(UtcTime t, int offset_min) {
  return std::chrono::floor<std::chrono::days>(ToLocal(t, offset_min));
}
int LocalHour(UtcTime t, int offset_min);
int LocalMinuteOfDay(UtcTime t, int offset_min);

// Monday = 0 ... Sunday = 6.
int WeekdayIndex(Date d);
inline bool IsWeekend(Date d) { return WeekdayIndex(d) >= 5; }

// 1..12
int MonthNumber(Date d);
std::chrono::year_month YearMonth(Date d);

inline UtcTime FloorToHour(UtcTime t) {
  return std::chrono::floor<std::chrono::hours>(t);
}

}  // namespace velotrace
