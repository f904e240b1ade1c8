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

#include "velotrace/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

#include "velotrace/csv.hpp"
#include "velotrace/error.hpp"
#include "velotrace/rng.hpp"

namespace velotrace {
namespace {

using json = nlohmann::ordered_json;
using std::chrono::hours;
using std::chrono::seconds;

constexpr std::array<double, 24> kDefaultShape{
    0.3, 0.15, 0.1, 0.08, 0.1, 0.3, 1.0, 2.6, 3.4, 2.0, 1.5, 1.6,
    1.9, 1.9, 1.6, 1.7, 2.3, 3.2, 3.3, 2.4, 1.5, 1.1, 0.8, 0.5};

enum Stream : std::uint64_t {
  kWeatherStream = 1,
  kRainStream = 2,
  kMaskStream = 3,
  kIdStream = 4,
  kDayStreamBase = 1000,
};

void Fail(const std::string& what) {
  throw Error(ErrorKind::kParameter, "synth config: " + what);
}

bool InUnit(double v) { return v >= 0 && v <= 1; }

UtcTime LocalMidnightUtc(Date d, int offset_min) {
  return UtcTime(d) - std::chrono::minutes(offset_min);
}

std::string HexId(std::uint64_t v) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[std::size_t(i)] = kDigits[v & 15];
  return s;
}

template <typename T>
void Get(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

double TempFactor(const SynthConfig& c, double temp) {
  const double loss = c.comfort_slope * std::fabs(temp - c.comfort_center_c) +
                      c.heat_slope * std::max(0.0, temp - c.heat_threshold_c);
  return std::max(0.05, 1 - loss);
}

}  // namespace

SynthConfig::SynthConfig() : hourly_shape(kDefaultShape) {
  hubs = {{"station", {44.5055, 11.3430}, 3},
          {"old_town", {44.4939, 11.3428}, 2},
          {"campus", {44.4965, 11.3530}, 2},
          {"stadium", {44.4920, 11.3100}, 1}};
}

void SynthConfig::Validate() const {
  if (end <= start) Fail("end must be after start");
  if (utc_offset_min < -14 * 60 || utc_offset_min > 14 * 60) Fail("utc_offset_min out of range");
  if (!IsValidLatLon({bbox.min_lat, bbox.min_lon}) || !IsValidLatLon({bbox.max_lat, bbox.max_lon}) ||
      bbox.min_lat >= bbox.max_lat || bbox.min_lon >= bbox.max_lon) {
    Fail("invalid bbox");
  }
  for (const auto& h : hubs) {
    if (h.name.empty() || !(h.weight >= 0) || !bbox.Contains(h.center)) {
      Fail("hub '" + h.name + "' must be named, inside the bbox, with weight >= 0");
    }
  }
  if (!InUnit(hub_origin_share)) Fail("hub_origin_share must be in [0, 1]");
  if (!(base_trips_per_day >= 0)) Fail("base_trips_per_day must be >= 0");
  for (double w : weekday_multiplier) {
    if (!(w >= 0)) Fail("weekday_multiplier entries must be >= 0");
  }
  double shape_sum = 0;
  for (double w : hourly_shape) {
    if (!(w >= 0)) Fail("hourly_shape entries must be >= 0");
    shape_sum += w;
  }
  if (!(shape_sum > 0)) Fail("hourly_shape must have positive mass");
  if (!(comfort_slope >= 0) || !(heat_slope >= 0) || !(temp_noise_c >= 0)) {
    Fail("temperature slopes and noise must be >= 0");
  }
  for (const auto& e : rain_events) {
    if (e.hours < 1 || !(e.mm_per_hour >= 0) || !InUnit(e.suppression) ||
        !InUnit(e.day_suppression)) {
      Fail("rain event at " + FormatTimestamp(e.start) + " out of range");
    }
  }
  if (!InUnit(random_rain_probability) || !InUnit(random_rain_suppression) ||
      !InUnit(random_rain_day_suppression)) {
    Fail("random rain parameters must be in [0, 1]");
  }
  std::set<std::pair<Date, CalendarKind>> seen;
  for (const auto& s : suppressions) {
    if (!InUnit(s.fraction)) Fail("suppression on " + FormatDate(s.date) + " must be in [0, 1]");
    if (!seen.insert({s.date, s.kind}).second) {
      Fail("duplicate suppression on " + FormatDate(s.date));
    }
  }
  if (!(trip_length_mode_m > 0) || !(trip_length_sigma >= 0)) Fail("invalid trip length");
  if (!(speed_mode_mps > 0) || !(speed_sigma >= 0)) Fail("invalid speed distribution");
  if (point_interval_s < 1) Fail("point_interval_s must be >= 1");
  if (!InUnit(missing_fraction)) Fail("missing_fraction must be in [0, 1]");
  if (!(day_noise_sd >= 0)) Fail("day_noise_sd must be >= 0");
}

SynthConfig SynthConfigFromJson(const nlohmann::json& j) {
  static const std::set<std::string> kKeys = {
      "seed", "start", "end", "utc_offset_min", "bbox", "hubs", "hub_origin_share",
      "base_trips_per_day", "weekday_multiplier", "hourly_shape", "temp_mean_c",
      "temp_annual_amplitude_c", "temp_peak_day_of_year", "temp_daily_amplitude_c",
      "temp_noise_c", "comfort_center_c", "comfort_slope", "heat_threshold_c",
      "heat_slope", "rain_events", "random_rain_probability",
      "random_rain_suppression", "random_rain_day_suppression", "suppressions",
      "trip_length_mode_m", "trip_length_sigma", "speed_mode_mps", "speed_sigma",
      "point_interval_s", "missing_fraction", "day_noise_sd"};
  SynthConfig c;
  try {
    for (const auto& [key, _] : j.items()) {
      if (!kKeys.contains(key)) Fail("unknown key '" + key + "'");
    }
    Get(j, "seed", c.seed);
    if (j.contains("start")) c.start = ParseDate(j.at("start").get<std::string>());
    if (j.contains("end")) c.end = ParseDate(j.at("end").get<std::string>());
    Get(j, "utc_offset_min", c.utc_offset_min);
    if (j.contains("bbox")) {
      const auto& b = j.at("bbox");
      c.bbox = {b.at("min_lat").get<double>(), b.at("min_lon").get<double>(),
                b.at("max_lat").get<double>(), b.at("max_lon").get<double>()};
    }
    if (j.contains("hubs")) {
      c.hubs.clear();
      for (const auto& h : j.at("hubs")) {
        c.hubs.push_back({h.at("name").get<std::string>(),
                          {h.at("lat").get<double>(), h.at("lon").get<double>()},
                          h.value("weight", 1.0)});
      }
    }
    Get(j, "hub_origin_share", c.hub_origin_share);
    Get(j, "base_trips_per_day", c.base_trips_per_day);
    Get(j, "weekday_multiplier", c.weekday_multiplier);
    Get(j, "hourly_shape", c.hourly_shape);
    Get(j, "temp_mean_c", c.temp_mean_c);
    Get(j, "temp_annual_amplitude_c", c.temp_annual_amplitude_c);
    Get(j, "temp_peak_day_of_year", c.temp_peak_day_of_year);
    Get(j, "temp_daily_amplitude_c", c.temp_daily_amplitude_c);
    Get(j, "temp_noise_c", c.temp_noise_c);
    Get(j, "comfort_center_c", c.comfort_center_c);
    Get(j, "comfort_slope", c.comfort_slope);
    Get(j, "heat_threshold_c", c.heat_threshold_c);
    Get(j, "heat_slope", c.heat_slope);
    if (j.contains("rain_events")) {
      for (const auto& e : j.at("rain_events")) {
        c.rain_events.push_back({ParseTimestamp(e.at("start").get<std::string>()),
                                 e.value("hours", 1), e.value("mm_per_hour", 1.0),
                                 e.value("suppression", 0.5),
                                 e.value("day_suppression", 0.0)});
      }
    }
    Get(j, "random_rain_probability", c.random_rain_probability);
    Get(j, "random_rain_suppression", c.random_rain_suppression);
    Get(j, "random_rain_day_suppression", c.random_rain_day_suppression);
    if (j.contains("suppressions")) {
      for (const auto& s : j.at("suppressions")) {
        DaySuppression d;
        d.date = ParseDate(s.at("date").get<std::string>());
        const std::string kind = s.value("kind", "holiday");
        bool known = false;
        for (CalendarKind k : {CalendarKind::kHoliday, CalendarKind::kStrike,
                               CalendarKind::kProtest, CalendarKind::kEvent}) {
          if (kind == CalendarKindName(k)) d.kind = k, known = true;
        }
        if (!known) Fail("unknown suppression kind '" + kind + "'");
        d.label = s.value("label", std::string(CalendarKindName(d.kind)));
        d.fraction = s.at("fraction").get<double>();
        c.suppressions.push_back(std::move(d));
      }
    }
    Get(j, "trip_length_mode_m", c.trip_length_mode_m);
    Get(j, "trip_length_sigma", c.trip_length_sigma);
    Get(j, "speed_mode_mps", c.speed_mode_mps);
    Get(j, "speed_sigma", c.speed_sigma);
    Get(j, "point_interval_s", c.point_interval_s);
    Get(j, "missing_fraction", c.missing_fraction);
    Get(j, "day_noise_sd", c.day_noise_sd);
  } catch (const nlohmann::json::exception& e) {
    Fail(e.what());
  }
  c.Validate();
  return c;
}

json SynthConfigToJson(const SynthConfig& c) {
  json hubs = json::array();
  for (const auto& h : c.hubs) {
    hubs.push_back({{"name", h.name}, {"lat", h.center.lat}, {"lon", h.center.lon},
                    {"weight", h.weight}});
  }
  json rain = json::array();
  for (const auto& e : c.rain_events) {
    rain.push_back({{"start", FormatTimestamp(e.start)}, {"hours", e.hours},
                    {"mm_per_hour", e.mm_per_hour}, {"suppression", e.suppression},
                    {"day_suppression", e.day_suppression}});
  }
  json sup = json::array();
  for (const auto& s : c.suppressions) {
    sup.push_back({{"date", FormatDate(s.date)}, {"kind", CalendarKindName(s.kind)},
                   {"label", s.label}, {"fraction", s.fraction}});
  }
  return {{"seed", c.seed},
          {"start", FormatDate(c.start)},
          {"end", FormatDate(c.end)},
          {"utc_offset_min", c.utc_offset_min},
          {"bbox", {{"min_lat", c.bbox.min_lat}, {"min_lon", c.bbox.min_lon},
                    {"max_lat", c.bbox.max_lat}, {"max_lon", c.bbox.max_lon}}},
          {"hubs", hubs},
          {"hub_origin_share", c.hub_origin_share},
          {"base_trips_per_day", c.base_trips_per_day},
          {"weekday_multiplier", c.weekday_multiplier},
          {"hourly_shape", c.hourly_shape},
          {"temp_mean_c", c.temp_mean_c},
          {"temp_annual_amplitude_c", c.temp_annual_amplitude_c},
          {"temp_peak_day_of_year", c.temp_peak_day_of_year},
          {"temp_daily_amplitude_c", c.temp_daily_amplitude_c},
          {"temp_noise_c", c.temp_noise_c},
          {"comfort_center_c", c.comfort_center_c},
          {"comfort_slope", c.comfort_slope},
          {"heat_threshold_c", c.heat_threshold_c},
          {"heat_slope", c.heat_slope},
          {"rain_events", rain},
          {"random_rain_probability", c.random_rain_probability},
          {"random_rain_suppression", c.random_rain_suppression},
          {"random_rain_day_suppression", c.random_rain_day_suppression},
          {"suppressions", sup},
          {"trip_length_mode_m", c.trip_length_mode_m},
          {"trip_length_sigma", c.trip_length_sigma},
          {"speed_mode_mps", c.speed_mode_mps},
          {"speed_sigma", c.speed_sigma},
          {"point_interval_s", c.point_interval_s},
          {"missing_fraction", c.missing_fraction},
          {"day_noise_sd", c.day_noise_sd}};
}

SynthData Simulate(const SynthConfig& config) {
  config.Validate();
  SynthData data;
  data.config = config;
  const SynthConfig& c = data.config;
  const int n_days = int((c.end - c.start).count());

  // Random rain is drawn day by day from its own stream, so toggling it never
  // perturbs the trip streams.
  data.rain = c.rain_events;
  if (c.random_rain_probability > 0) {
    CounterRng rng(DeriveKey(c.seed, kRainStream));
    for (int d = 0; d < n_days; ++d) {
      const bool rains = rng.Uniform() < c.random_rain_probability;
      const int hour = 5 + int(rng.Below(18));
      const int len = 1 + int(rng.Below(6));
      const double mm = rng.Uniform(0.5, 6.0);
      if (!rains) continue;
      data.rain.push_back({LocalMidnightUtc(c.start + std::chrono::days(d), c.utc_offset_min) +
                               hours(hour),
                           len, mm, c.random_rain_suppression,
                           c.random_rain_day_suppression});
    }
  }
  std::stable_sort(data.rain.begin(), data.rain.end(),
                   [](const RainEvent& a, const RainEvent& b) { return a.start < b.start; });

  for (const auto& s : c.suppressions) data.calendar.push_back({s.date, s.kind, s.label});
  std::sort(data.calendar.begin(), data.calendar.end(), [](const auto& a, const auto& b) {
    return std::pair(a.date, int(a.kind)) < std::pair(b.date, int(b.kind));
  });

  const UtcTime first_hour = LocalMidnightUtc(c.start, c.utc_offset_min);
  const std::size_t n_hours = std::size_t(n_days) * 24;
  CounterRng weather_rng(DeriveKey(c.seed, kWeatherStream));
  data.weather.resize(n_hours);
  std::vector<double> rain_factor(n_hours, 1.0);
  for (std::size_t h = 0; h < n_hours; ++h) {
    const UtcTime t = first_hour + hours(h);
    const Date local_day = LocalDate(t, c.utc_offset_min);
    const auto ymd = std::chrono::year_month_day(local_day);
    const int doy = int((local_day - Date(ymd.year() / std::chrono::January / 1)).count()) + 1;
    const double local_hour = double(LocalMinuteOfDay(t, c.utc_offset_min)) / 60.0 + 0.5;
    double temp = c.temp_mean_c +
                  c.temp_annual_amplitude_c *
                      std::cos(2 * std::numbers::pi * (doy - c.temp_peak_day_of_year) / 365.25) +
                  c.temp_daily_amplitude_c *
                      std::cos(2 * std::numbers::pi * (local_hour - 15) / 24);
    temp += weather_rng.Normal(0, c.temp_noise_c);
    const double wind = weather_rng.LogNormal(std::log(3.0), 0.35);
    double precip = 0;
    for (const auto& e : data.rain) {
      if (t >= e.start && t < e.start + hours(e.hours)) {
        precip += e.mm_per_hour;
        rain_factor[h] *= 1 - e.suppression;
      }
    }
    data.weather[h] = {t, temp, precip, wind};
  }

  double shape_sum = 0;
  for (double w : c.hourly_shape) shape_sum += w;
  double hub_weight = 0;
  for (const auto& hub : c.hubs) hub_weight += hub.weight;
  const LatLon center = c.bbox.Center();
  const double len_mu = std::log(c.trip_length_mode_m) + c.trip_length_sigma * c.trip_length_sigma;
  const double speed_mu = std::log(c.speed_mode_mps) + c.speed_sigma * c.speed_sigma;

  for (int d = 0; d < n_days; ++d) {
    const Date day = c.start + std::chrono::days(d);
    CounterRng rng(DeriveKey(c.seed, kDayStreamBase + std::uint64_t(d)));
    SynthDay info;
    info.date = day;
    info.level = c.day_noise_sd > 0 ? rng.LogNormal(0, c.day_noise_sd) : 1.0;
    double day_factor = info.level * c.weekday_multiplier[std::size_t(WeekdayIndex(day))];
    for (const auto& e : data.rain) {
      if (LocalDate(e.start, c.utc_offset_min) == day) day_factor *= 1 - e.day_suppression;
    }
    for (const auto& s : c.suppressions) {
      if (s.date == day) day_factor *= 1 - s.fraction;
    }
    for (int lh = 0; lh < 24; ++lh) {
      const std::size_t h = std::size_t(d) * 24 + std::size_t(lh);
      const double lambda = c.base_trips_per_day * c.hourly_shape[std::size_t(lh)] / shape_sum *
                            day_factor * TempFactor(c, data.weather[h].temp_c) * rain_factor[h];
      info.expected += lambda;
      const std::uint64_t n = rng.Poisson(lambda);
      info.realized += n;
      for (std::uint64_t k = 0; k < n; ++k) {
        SynthTrip trip;
        trip.start = data.weather[h].hour + seconds(rng.Below(3600));
        LatLon origin;
        if (!c.hubs.empty() && hub_weight > 0 && rng.Uniform() < c.hub_origin_share) {
          double pick = rng.Uniform() * hub_weight;
          std::size_t i = 0;
          while (i + 1 < c.hubs.size() && pick >= c.hubs[i].weight) pick -= c.hubs[i++].weight;
          trip.hub = int(i);
          // Jitter stays well inside the default hub radius.
          const LocalFrame frame(c.hubs[i].center, c.hubs[i].center.lat);
          origin = frame.FromMeters(rng.Uniform(-100, 100), rng.Uniform(-100, 100));
        } else {
          origin = {rng.Uniform(c.bbox.min_lat, c.bbox.max_lat),
                    rng.Uniform(c.bbox.min_lon, c.bbox.max_lon)};
        }
        const double length = std::clamp(rng.LogNormal(len_mu, c.trip_length_sigma), 200.0, 20000.0);
        const LocalFrame frame(origin, center.lat);
        LatLon dest;
        for (int attempt = 0; attempt < 8; ++attempt) {
          const double bearing = rng.Uniform(0, 2 * std::numbers::pi);
          dest = frame.FromMeters(length * std::cos(bearing), length * std::sin(bearing));
          if (c.bbox.Contains(dest)) break;
        }
        dest.lat = std::clamp(dest.lat, c.bbox.min_lat, c.bbox.max_lat);
        dest.lon = std::clamp(dest.lon, c.bbox.min_lon, c.bbox.max_lon);
        trip.origin = origin;
        trip.destination = dest;
        trip.speed_mps = std::clamp(rng.LogNormal(speed_mu, c.speed_sigma), 1.0, 12.0);
        trip.duration_s = std::max(1, int(std::lround(Haversine(origin, dest) / trip.speed_mps)));
        trip.accuracy_m = std::round(rng.Uniform(3, 15) * 10) / 10;
        data.trips.push_back(std::move(trip));
      }
    }
    data.days.push_back(info);
  }

  std::stable_sort(data.trips.begin(), data.trips.end(),
                   [](const SynthTrip& a, const SynthTrip& b) { return a.start < b.start; });
  const std::uint64_t id_key = DeriveKey(c.seed, kIdStream);
  for (std::size_t i = 0; i < data.trips.size(); ++i) {
    data.trips[i].activity_id = HexId(Mix64(id_key + i));
  }
  return data;
}

std::vector<TripPoint> TripTrajectory(const SynthTrip& trip, int interval_s) {
  std::vector<TripPoint> points;
  const double duration = double(trip.duration_s);
  auto at = [&](int offset) {
    const double f = double(offset) / duration;
    TripPoint p;
    p.timestamp = trip.start + seconds(offset);
    p.position = {trip.origin.lat + (trip.destination.lat - trip.origin.lat) * f,
                  trip.origin.lon + (trip.destination.lon - trip.origin.lon) * f};
    p.accuracy = trip.accuracy_m;
    p.speed = trip.speed_mps;
    return p;
  };
  for (int off = 0; off < trip.duration_s; off += interval_s) points.push_back(at(off));
  points.push_back(at(trip.duration_s));
  return points;
}

std::vector<Trip> SynthData::Summaries() const {
  std::vector<Trip> out;
  out.reserve(trips.size());
  for (const auto& t : trips) {
    Trip trip;
    trip.trip_id = t.activity_id;
    trip.start_time = t.start;
    trip.end_time = t.start + seconds(t.duration_s);
    trip.start_point = t.origin;
    trip.end_point = t.destination;
    trip.distance_m = Haversine(t.origin, t.destination);
    trip.duration_s = t.duration_s;
    trip.avg_speed_mps = trip.distance_m / trip.duration_s;
    out.push_back(std::move(trip));
  }
  std::sort(out.begin(), out.end(),
            [](const Trip& a, const Trip& b) { return a.trip_id < b.trip_id; });
  return out;
}

json SynthData::TruthJson() const {
  const SynthConfig& c = config;
  json daily = json::array();
  double expected_total = 0;
  for (const auto& d : days) {
    expected_total += d.expected;
    daily.push_back({{"date", FormatDate(d.date)},
                     {"weekday", WeekdayIndex(d.date)},
                     {"expected", d.expected},
                     {"realized", d.realized},
                     {"level", d.level}});
  }
  double hub_weight = 0;
  for (const auto& h : c.hubs) hub_weight += h.weight;
  std::vector<std::uint64_t> from_hub(c.hubs.size(), 0);
  for (const auto& t : trips) {
    if (t.hub >= 0) ++from_hub[std::size_t(t.hub)];
  }
  json hubs = json::array();
  for (std::size_t i = 0; i < c.hubs.size(); ++i) {
    const double share = hub_weight > 0 ? c.hub_origin_share * c.hubs[i].weight / hub_weight : 0;
    hubs.push_back({{"name", c.hubs[i].name},
                    {"lat", c.hubs[i].center.lat},
                    {"lon", c.hubs[i].center.lon},
                    {"expected_share", share},
                    {"trips", from_hub[i]},
                    {"realized_share",
                     trips.empty() ? 0.0 : double(from_hub[i]) / double(trips.size())}});
  }
  json rain_json = json::array();
  for (const auto& e : rain) {
    rain_json.push_back({{"start", FormatTimestamp(e.start)}, {"hours", e.hours},
                         {"mm_per_hour", e.mm_per_hour}, {"suppression", e.suppression},
                         {"day_suppression", e.day_suppression}});
  }
  json sup = json::array();
  for (const auto& s : c.suppressions) {
    sup.push_back({{"date", FormatDate(s.date)}, {"kind", CalendarKindName(s.kind)},
                   {"label", s.label}, {"fraction", s.fraction}});
  }
  return {{"seed", c.seed},
          {"start", FormatDate(c.start)},
          {"end", FormatDate(c.end)},
          {"utc_offset_min", c.utc_offset_min},
          {"total_trips", trips.size()},
          {"expected_total_trips", expected_total},
          {"daily", daily},
          {"hub_flows", hubs},
          {"suppressions", {{"rain", rain_json}, {"calendar", sup}}}};
}

SynthFiles Generate(const SynthData& data, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot create directory " + dir.string());
  SynthFiles files{dir / "points.csv", dir / "weather.csv", dir / "calendar.csv",
                   dir / "truth.json", dir / "missing_truth.csv"};
  auto open = [](const std::filesystem::path& p) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error(ErrorKind::kIo, "cannot write " + p.string());
    return out;
  };
  const SynthConfig& c = data.config;
  {
    std::ofstream points = open(files.points);
    std::ofstream missing = open(files.missing_truth);
    CsvWriter pw(points), mw(missing);
    pw.Row({"activity_id", "timestamp", "lat", "lon", "accuracy", "speed"});
    mw.Row({"activity_id", "timestamp", "field", "lat", "lon", "accuracy", "speed"});
    const std::uint64_t mask_key = DeriveKey(c.seed, kMaskStream);
    static constexpr std::string_view kFields[] = {"coordinates", "accuracy", "speed"};
    for (std::size_t i = 0; i < data.trips.size(); ++i) {
      const SynthTrip& trip = data.trips[i];
      CounterRng rng(DeriveKey(mask_key, i));
      for (const TripPoint& p : TripTrajectory(trip, c.point_interval_s)) {
        std::string lat = FormatDouble(p.position.lat), lon = FormatDouble(p.position.lon);
        std::string acc = FormatDouble(p.accuracy), speed = FormatDouble(p.speed);
        const std::string ts = FormatTimestamp(p.timestamp);
        if (c.missing_fraction > 0 && rng.Uniform() < c.missing_fraction) {
          const std::size_t field = rng.Below(3);
          mw.Row({trip.activity_id, ts, std::string(kFields[field]), lat, lon, acc, speed});
          if (field == 0) lat.clear(), lon.clear();
          if (field == 1) acc.clear();
          if (field == 2) speed.clear();
        }
        pw.Row({trip.activity_id, ts, lat, lon, acc, speed});
      }
    }
    if (!points || !missing) throw Error(ErrorKind::kIo, "write failed in " + dir.string());
  }
  {
    std::ofstream out = open(files.weather);
    WriteWeather(out, data.weather);
  }
  {
    std::ofstream out = open(files.calendar);
    WriteCalendar(out, data.calendar);
  }
  {
    std::ofstream out = open(files.truth);
    out << data.TruthJson().dump(2) << '\n';
  }
  return files;
}

}  // namespace velotrace
