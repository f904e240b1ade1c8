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

// GPS point parsing and trip reconstruction.

#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "velotrace/geo.hpp"
#include "velotrace/time.hpp"

namespace velotrace {

struct GpsPoint {
  std::string activity_id;
  UtcTime timestamp;
  std::optional<double> lat;
  std::optional<double> lon;
  std::optional<double> accuracy;
  std::optional<double> speed;
};

// A GPS sample after repair: every field present.
struct TripPoint {
  UtcTime timestamp;
  LatLon position;
  double accuracy = 0;
  double speed = 0;
};

struct TripMetrics {
  double distance_m = 0;
  double duration_s = 0;
  double avg_speed_mps = 0;
};

struct Trip {
  std::string trip_id;
  // Empty when the trip was loaded from a summary file.
  std::vector<TripPoint> points;
  UtcTime start_time;
  UtcTime end_time;
  LatLon start_point;
  LatLon end_point;
  double distance_m = 0;
  double duration_s = 0;
  double avg_speed_mps = 0;
};

enum class RejectReason { kBoundaryMissing, kTooFewPoints, kZeroDuration };
std::string_view RejectReasonName(RejectReason reason);

struct Rejection {
  std::string activity_id;
  RejectReason reason;
  std::string detail;
  // Input points discarded by this entry.
  std::size_t points = 0;
};

struct Assembly {
  std::vector<Trip> trips;  // ordered by trip_id
  std::vector<Rejection> rejections;
  std::size_t rejected_points = 0;
};

inline constexpr std::string_view kPointHeader =
    "activity_id,timestamp,lat,lon,accuracy,speed";

// Parses the point CSV. Errors carry the 1-based line number.
std::vector<GpsPoint> ParsePoints(std::string_view csv_text);
std::vector<GpsPoint> ReadPointsFile(const std::filesystem::path& path);
void WritePoints(std::ostream& out, std::span<const GpsPoint> points);

// Groups by activity, sorts by time (stable), repairs gaps by linear
// interpolation in time and computes per-trip metrics. Never throws on data
// problems; everything discarded lands in the rejection log.
Assembly AssembleTrips(std::span<const GpsPoint> points);

// Requires >= 2 points; throws Error(kInput) for zero duration.
TripMetrics ComputeTripMetrics(std::span<const TripPoint> points);

void WriteRejections(std::ostream& out, std::span<const Rejection> rejections);

// Trip summaries without the point lists.
void WriteTripSummaries(std::ostream& out, std::span<const Trip> trips);
std::vector<Trip> ReadTripSummaries(const std::filesystem::path& path);

// Repaired points of every trip: `trip_id,timestamp,lat,lon,accuracy,speed`.
void WriteTripPoints(std::ostream& out, std::span<const Trip> trips);

struct TimedPosition {
  UtcTime timestamp;
  LatLon position;
};
std::vector<TimedPosition> ReadTripPoints(const std::filesystem::path& path);

}  // namespace velotrace
