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

#include "velotrace/ingest.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

#include "velotrace/csv.hpp"
#include "velotrace/error.hpp"
#include "velotrace/parallel.hpp"

namespace velotrace {
namespace {

std::string LinePrefix(std::size_t line) {
  return "line " + std::to_string(line) + ": ";
}

std::optional<double> OptionalNumber(std::string_view field,
                                     std::string_view name, std::size_t line) {
  if (field.empty()) return std::nullopt;
  auto value = ParseDouble(field);
  if (!value) {
    throw Error(ErrorKind::kInput, LinePrefix(line) + "non-numeric " +
                                       std::string(name) + " '" +
                                       std::string(field) + "'");
  }
  return value;
}

std::string OptionalField(const std::optional<double>& v) {
  return v ? FormatDouble(*v) : std::string();
}

// Linear interpolation of one optional field across the kept points.
// Interior gaps interpolate in time; leading/trailing gaps copy the nearest
// present value. Returns false when no point carries the field.
template <typename Get, typename Set>
bool RepairField(std::span<const GpsPoint* const> pts, Get get, Set set) {
  std::vector<std::size_t> present;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (get(*pts[i])) present.push_back(i);
  }
  if (present.empty()) return false;
  std::size_t next = 0;  // index into present of the first present >= i
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (next < present.size() && present[next] < i) ++next;
    if (next < present.size() && present[next] == i) {
      set(i, *get(*pts[i]));
      continue;
    }
    if (next == 0) {
      set(i, *get(*pts[present.front()]));
    } else if (next == present.size()) {
      set(i, *get(*pts[present.back()]));
    } else {
      const GpsPoint& a = *pts[present[next - 1]];
      const GpsPoint& b = *pts[present[next]];
      const double span = double((b.timestamp - a.timestamp).count());
      const double frac =
          span > 0 ? double((pts[i]->timestamp - a.timestamp).count()) / span
                   : 0.0;
      set(i, *get(a) + frac * (*get(b) - *get(a)));
    }
  }
  return true;
}

struct GroupOutcome {
  std::optional<Trip> trip;
  std::vector<Rejection> rejections;
};

GroupOutcome AssembleGroup(std::string_view id,
                           std::vector<const GpsPoint*> group) {
  GroupOutcome out;
  std::stable_sort(group.begin(), group.end(),
                   [](const GpsPoint* a, const GpsPoint* b) {
                     return a->timestamp < b->timestamp;
                   });

  // Coordinates: drop missing points before the first / after the last
  // present coordinate; they cannot be interpolated.
  std::size_t first = group.size(), last = 0;
  for (std::size_t i = 0; i < group.size(); ++i) {
    if (group[i]->lat) {
      first = std::min(first, i);
      last = i;
    }
  }
  for (std::size_t i = 0; i < group.size(); ++i) {
    if (first == group.size() || i < first || i > last) {
      out.rejections.push_back({std::string(id), RejectReason::kBoundaryMissing,
                                FormatTimestamp(group[i]->timestamp), 1});
    }
  }
  if (first == group.size()) return out;
  std::span<const GpsPoint* const> kept(group.data() + first, last - first + 1);

  if (kept.size() < 2) {
    out.rejections.push_back({std::string(id), RejectReason::kTooFewPoints,
                              std::to_string(kept.size()) + " point(s)",
                              kept.size()});
    return out;
  }
  const auto duration = kept.back()->timestamp - kept.front()->timestamp;
  if (duration.count() <= 0) {
    out.rejections.push_back({std::string(id), RejectReason::kZeroDuration,
                              std::to_string(kept.size()) + " point(s)",
                              kept.size()});
    return out;
  }

  Trip trip;
  trip.trip_id = std::string(id);
  trip.points.resize(kept.size());
  for (std::size_t i = 0; i < kept.size(); ++i) {
    trip.points[i].timestamp = kept[i]->timestamp;
  }
  RepairField(kept, [](const GpsPoint& p) { return p.lat; },
              [&](std::size_t i, double v) { trip.points[i].position.lat = v; });
  RepairField(kept, [](const GpsPoint& p) { return p.lon; },
              [&](std::size_t i, double v) { trip.points[i].position.lon = v; });
  const bool has_accuracy = RepairField(
      kept, [](const GpsPoint& p) { return p.accuracy; },
      [&](std::size_t i, double v) { trip.points[i].accuracy = v; });
  const bool has_speed = RepairField(
      kept, [](const GpsPoint& p) { return p.speed; },
      [&](std::size_t i, double v) { trip.points[i].speed = v; });

  const TripMetrics m = ComputeTripMetrics(trip.points);
  trip.start_time = trip.points.front().timestamp;
  trip.end_time = trip.points.back().timestamp;
  trip.start_point = trip.points.front().position;
  trip.end_point = trip.points.back().position;
  trip.distance_m = m.distance_m;
  trip.duration_s = m.duration_s;
  trip.avg_speed_mps = m.avg_speed_mps;
  // A trip that never reported these fields gets neutral fills.
  if (!has_accuracy) {
    for (auto& p : trip.points) p.accuracy = 0;
  }
  if (!has_speed) {
    for (auto& p : trip.points) p.speed = m.avg_speed_mps;
  }
  out.trip = std::move(trip);
  return out;
}

}  // namespace

std::string_view RejectReasonName(RejectReason reason) {
  switch (reason) {
    case RejectReason::kBoundaryMissing: return "boundary-missing";
    case RejectReason::kTooFewPoints: return "too-few-points";
    case RejectReason::kZeroDuration: return "zero-duration";
  }
  return "unknown";
}

std::vector<GpsPoint> ParsePoints(std::string_view csv_text) {
  CsvReader reader{std::string(csv_text)};
  reader.ExpectHeader({"activity_id", "timestamp", "lat", "lon", "accuracy",
                       "speed"});
  std::vector<GpsPoint> points;
  while (reader.Next()) {
    const std::size_t line = reader.line();
    if (reader.size() != 6) {
      throw Error(ErrorKind::kSchema, LinePrefix(line) + "expected 6 fields, got " +
                                          std::to_string(reader.size()));
    }
    GpsPoint p;
    p.activity_id = std::string(reader[0]);
    if (p.activity_id.empty()) {
      throw Error(ErrorKind::kSchema, LinePrefix(line) + "empty activity_id");
    }
    auto t = TryParseTimestamp(reader[1]);
    if (!t) {
      throw Error(ErrorKind::kInput, LinePrefix(line) + "malformed timestamp '" +
                                         std::string(reader[1]) + "'");
    }
    p.timestamp = *t;
    p.lat = OptionalNumber(reader[2], "lat", line);
    p.lon = OptionalNumber(reader[3], "lon", line);
    p.accuracy = OptionalNumber(reader[4], "accuracy", line);
    p.speed = OptionalNumber(reader[5], "speed", line);
    if (p.lat.has_value() != p.lon.has_value()) {
      throw Error(ErrorKind::kSchema,
                  LinePrefix(line) + "half-present coordinate (lat and lon "
                                     "must both be present or both empty)");
    }
    if (p.lat && (*p.lat < -90 || *p.lat > 90)) {
      throw Error(ErrorKind::kRange, LinePrefix(line) + "lat " +
                                         FormatDouble(*p.lat) +
                                         " outside [-90, 90]");
    }
    if (p.lon && (*p.lon < -180 || *p.lon > 180)) {
      throw Error(ErrorKind::kRange, LinePrefix(line) + "lon " +
                                         FormatDouble(*p.lon) +
                                         " outside [-180, 180]");
    }
    if (p.accuracy && *p.accuracy < 0) {
      throw Error(ErrorKind::kRange, LinePrefix(line) + "negative accuracy");
    }
    if (p.speed && *p.speed < 0) {
      throw Error(ErrorKind::kRange, LinePrefix(line) + "negative speed");
    }
    points.push_back(std::move(p));
  }
  return points;
}

std::vector<GpsPoint> ReadPointsFile(const std::filesystem::path& path) {
  return ParsePoints(ReadFile(path));
}

void WritePoints(std::ostream& out, std::span<const GpsPoint> points) {
  out << kPointHeader << '\n';
  CsvWriter w(out);
  for (const auto& p : points) {
    w.Row({p.activity_id, FormatTimestamp(p.timestamp), OptionalField(p.lat),
           OptionalField(p.lon), OptionalField(p.accuracy),
           OptionalField(p.speed)});
  }
}

TripMetrics ComputeTripMetrics(std::span<const TripPoint> points) {
  if (points.size() < 2) {
    throw Error(ErrorKind::kInput, "trip metrics need at least 2 points");
  }
  TripMetrics m;
  for (std::size_t i = 1; i < points.size(); ++i) {
    m.distance_m += Haversine(points[i - 1].position, points[i].position);
  }
  m.duration_s =
      double((points.back().timestamp - points.front().timestamp).count());
  if (m.duration_s <= 0) throw Error(ErrorKind::kInput, "zero-duration trip");
  m.avg_speed_mps = m.distance_m / m.duration_s;
  return m;
}

Assembly AssembleTrips(std::span<const GpsPoint> points) {
  std::unordered_map<std::string_view, std::vector<const GpsPoint*>> groups;
  for (const auto& p : points) groups[p.activity_id].push_back(&p);

  std::vector<std::string_view> ids;
  ids.reserve(groups.size());
  for (const auto& [id, _] : groups) ids.push_back(id);
  std::sort(ids.begin(), ids.end());

  std::vector<GroupOutcome> outcomes(ids.size());
  ParallelFor(ids.size(), [&](std::size_t i) {
    outcomes[i] = AssembleGroup(ids[i], std::move(groups.at(ids[i])));
  });

  Assembly result;
  for (auto& o : outcomes) {
    if (o.trip) result.trips.push_back(std::move(*o.trip));
    for (auto& r : o.rejections) {
      result.rejected_points += r.points;
      result.rejections.push_back(std::move(r));
    }
  }
  return result;
}

void WriteRejections(std::ostream& out, std::span<const Rejection> rejections) {
  CsvWriter w(out);
  w.Row({"activity_id", "reason", "detail"});
  for (const auto& r : rejections) {
    w.Row({r.activity_id, RejectReasonName(r.reason), r.detail});
  }
}

void WriteTripSummaries(std::ostream& out, std::span<const Trip> trips) {
  CsvWriter w(out);
  w.Row({"trip_id", "start_time", "end_time", "start_lat", "start_lon",
         "end_lat", "end_lon", "distance_m", "duration_s", "avg_speed_mps"});
  for (const auto& t : trips) {
    w.Row({t.trip_id, FormatTimestamp(t.start_time), FormatTimestamp(t.end_time),
           FormatDouble(t.start_point.lat), FormatDouble(t.start_point.lon),
           FormatDouble(t.end_point.lat), FormatDouble(t.end_point.lon),
           FormatDouble(t.distance_m), FormatDouble(t.duration_s),
           FormatDouble(t.avg_speed_mps)});
  }
}

std::vector<Trip> ReadTripSummaries(const std::filesystem::path& path) {
  CsvReader reader = CsvReader::FromFile(path);
  reader.ExpectHeader({"trip_id", "start_time", "end_time", "start_lat",
                       "start_lon", "end_lat", "end_lon", "distance_m",
                       "duration_s", "avg_speed_mps"});
  std::vector<Trip> trips;
  while (reader.Next()) {
    const std::size_t line = reader.line();
    if (reader.size() != 10) {
      throw Error(ErrorKind::kSchema, LinePrefix(line) + "expected 10 fields");
    }
    auto num = [&](std::size_t i) {
      auto v = ParseDouble(reader[i]);
      if (!v) throw Error(ErrorKind::kInput, LinePrefix(line) + "bad number");
      return *v;
    };
    auto ts = [&](std::size_t i) {
      auto v = TryParseTimestamp(reader[i]);
      if (!v) throw Error(ErrorKind::kInput, LinePrefix(line) + "bad timestamp");
      return *v;
    };
    Trip t;
    t.trip_id = std::string(reader[0]);
    t.start_time = ts(1);
    t.end_time = ts(2);
    t.start_point = {num(3), num(4)};
    t.end_point = {num(5), num(6)};
    t.distance_m = num(7);
    t.duration_s = num(8);
    t.avg_speed_mps = num(9);
    trips.push_back(std::move(t));
  }
  return trips;
}

void WriteTripPoints(std::ostream& out, std::span<const Trip> trips) {
  CsvWriter w(out);
  w.Row({"trip_id", "timestamp", "lat", "lon", "accuracy", "speed"});
  for (const auto& t : trips) {
    for (const auto& p : t.points) {
      w.Row({t.trip_id, FormatTimestamp(p.timestamp),
             FormatDouble(p.position.lat), FormatDouble(p.position.lon),
             FormatDouble(p.accuracy), FormatDouble(p.speed)});
    }
  }
}

std::vector<TimedPosition> ReadTripPoints(const std::filesystem::path& path) {
  CsvReader reader = CsvReader::FromFile(path);
  reader.ExpectHeader({"trip_id", "timestamp", "lat", "lon", "accuracy", "speed"});
  std::vector<TimedPosition> out;
  while (reader.Next()) {
    if (reader.size() != 6) {
      throw Error(ErrorKind::kSchema,
                  LinePrefix(reader.line()) + "expected 6 fields");
    }
    auto t = TryParseTimestamp(reader[1]);
    auto lat = ParseDouble(reader[2]);
    auto lon = ParseDouble(reader[3]);
    if (!t || !lat || !lon) {
      throw Error(ErrorKind::kInput, LinePrefix(reader.line()) + "bad point row");
    }
    out.push_back({*t, {*lat, *lon}});
  }
  return out;
}

}  // namespace velotrace
