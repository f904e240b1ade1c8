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

// Seeded synthetic city: trips, hourly weather and a calendar with planted
// effects recorded in a truth sidecar.

#pragma once

#include <array>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "velotrace/covariates.hpp"
#include "velotrace/geo.hpp"
#include "velotrace/ingest.hpp"
#include "velotrace/spatial.hpp"
#include "velotrace/time.hpp"

namespace velotrace {

struct SynthHub {
  std::string name;
  LatLon center;
  double weight = 1;
};

struct RainEvent {
  UtcTime start;  // first rainy hour
  int hours = 1;
  double mm_per_hour = 1;
  double suppression = 0.5;      // demand cut while it rains
  double day_suppression = 0;    // demand cut over the whole local day
};

struct DaySuppression {
  Date date;
  CalendarKind kind = CalendarKind::kHoliday;
  std::string label;
  double fraction = 0;
};

struct SynthConfig {
  std::uint64_t seed = 1;
  Date start = ParseDate("2017-05-01");
  Date end = ParseDate("2017-06-01");  // exclusive
  int utc_offset_min = 120;
  BBox bbox{44.46, 11.28, 44.53, 11.40};
  std::vector<SynthHub> hubs;
  double hub_origin_share = 0.4;

  double base_trips_per_day = 1000;
  std::array<double, 7> weekday_multiplier{1, 1, 1, 1, 1, 0.476, 0.476};
  std::array<double, 24> hourly_shape{};

  double temp_mean_c = 20;
  double temp_annual_amplitude_c = 8;
  int temp_peak_day_of_year = 200;
  double temp_daily_amplitude_c = 4;
  double temp_noise_c = 0.5;
  double comfort_center_c = 20;
  double comfort_slope = 0.015;  // demand loss per degree away from comfort
  double heat_threshold_c = 27;
  double heat_slope = 0.04;      // extra loss per degree above the threshold

  std::vector<RainEvent> rain_events;
  double random_rain_probability = 0;  // per day
  double random_rain_suppression = 0.6;
  double random_rain_day_suppression = 0.3;
  std::vector<DaySuppression> suppressions;

  double trip_length_mode_m = 1600;
  double trip_length_sigma = 0.6;
  double speed_mode_mps = 3.9;
  double speed_sigma = 0.15;
  int point_interval_s = 15;
  double missing_fraction = 0.05;
  double day_noise_sd = 0;  // sd of the log daily level

  SynthConfig();
  // Error(kParameter) for out-of-range values.
  void Validate() const;
};

SynthConfig SynthConfigFromJson(const nlohmann::json& j);
nlohmann::ordered_json SynthConfigToJson(const SynthConfig& c);

struct SynthTrip {
  std::string activity_id;
  UtcTime start;
  int duration_s = 1;
  LatLon origin;
  LatLon destination;
  double speed_mps = 0;
  double accuracy_m = 0;
  int hub = -1;  // origin hub index
};

struct SynthDay {
  Date date;
  double expected = 0;  // planted mean count
  std::uint64_t realized = 0;
  double level = 1;     // day noise factor
};

struct SynthData {
  SynthConfig config;
  std::vector<SynthTrip> trips;  // ordered by start time
  std::vector<WeatherRecord> weather;
  std::vector<CalendarEntry> calendar;
  std::vector<SynthDay> days;
  std::vector<RainEvent> rain;  // planted plus random events

  // Trip summaries with straight-line metrics and no points.
  std::vector<Trip> Summaries() const;
  nlohmann::ordered_json TruthJson() const;
};

SynthData Simulate(const SynthConfig& config);

// Samples every `point_interval_s` along the straight segment, plus the end
// instant; position is linear in time.
std::vector<TripPoint> TripTrajectory(const SynthTrip& trip, int interval_s);

struct SynthFiles {
  std::filesystem::path points, weather, calendar, truth, missing_truth;
};

// Writes points.csv, weather.csv, calendar.csv, truth.json and
// missing_truth.csv (true values of every masked point).
SynthFiles Generate(const SynthData& data, const std::filesystem::path& dir);

}  // namespace velotrace
