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

#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "velotrace/error.hpp"
#include "velotrace/ingest.hpp"
#include "velotrace/rng.hpp"

namespace velotrace {
namespace {

using namespace std::chrono_literals;

constexpr std::string_view kHeader = "activity_id,timestamp,lat,lon,accuracy,speed\n";

ErrorKind ParseErrorKind(const std::string& rows, std::string* message = nullptr) {
  try {
    ParsePoints(std::string(kHeader) + rows);
  } catch (const Error& e) {
    if (message) *message = e.what();
    return e.kind();
  }
  ADD_FAILURE() << "no error for: " << rows;
  return ErrorKind::kState;
}

GpsPoint Point(std::string id, UtcTime t, std::optional<double> lat, std::optional<double> lon) {
  return {std::move(id), t, lat, lon, 5.0, 3.0};
}

TEST(ParsePoints, HeaderOnly) { EXPECT_TRUE(ParsePoints(kHeader).empty()); }

TEST(ParsePoints, FieldMapping) {
  const auto pts = ParsePoints(std::string(kHeader) +
                               "A1,2017-05-09T08:00:00Z,44.4939,11.3428,5.0,3.2\n"
                               "A2,2017-05-09T08:00:05Z,,,,\n");
  ASSERT_EQ(pts.size(), 2u);
  EXPECT_EQ(pts[0].activity_id, "A1");
  EXPECT_EQ(pts[0].timestamp, ParseTimestamp("2017-05-09T08:00:00Z"));
  EXPECT_EQ(*pts[0].lat, 44.4939);
  EXPECT_EQ(*pts[0].lon, 11.3428);
  EXPECT_EQ(*pts[0].accuracy, 5.0);
  EXPECT_EQ(*pts[0].speed, 3.2);
  EXPECT_FALSE(pts[1].lat || pts[1].lon || pts[1].accuracy || pts[1].speed);
}

TEST(ParsePoints, ErrorsNameTheLine) {
  std::string msg;
  EXPECT_EQ(ParseErrorKind("A,2017-05-09T08:00:00Z,1,1,,\nA,2017-05-09T08:00:00Z,95.0,11,,\n", &msg),
            ErrorKind::kRange);
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
  EXPECT_EQ(ParseErrorKind("A,2017-05-09 08:00,1,1,,\n", &msg), ErrorKind::kInput);
  EXPECT_NE(msg.find("line 2"), std::string::npos) << msg;
  EXPECT_EQ(ParseErrorKind("A,2017-05-09T08:00:00Z,44.1,,,\n"), ErrorKind::kSchema);
  EXPECT_EQ(ParseErrorKind("A,2017-05-09T08:00:00Z,1,181,,\n"), ErrorKind::kRange);
  EXPECT_EQ(ParseErrorKind("A,2017-05-09T08:00:00Z,1,1,-1,\n"), ErrorKind::kRange);
  EXPECT_EQ(ParseErrorKind(",2017-05-09T08:00:00Z,1,1,,\n"), ErrorKind::kSchema);
  EXPECT_EQ(ParseErrorKind("A,2017-05-09T08:00:00Z,1,1,,\n,\n"), ErrorKind::kSchema);
  EXPECT_EQ(ParseErrorKind("A,2017-05-09T08:00:00Z,abc,1,,\n"), ErrorKind::kInput);
}

TEST(ParsePoints, WriteRoundTrip) {
  const UtcTime t0 = ParseTimestamp("2017-05-09T08:00:00Z");
  std::vector<GpsPoint> pts = {Point("a", t0, 44.123456789012345, 11.1), Point("b", t0 + 1s, {}, {})};
  pts[1].speed.reset();
  std::ostringstream s;
  WritePoints(s, pts);
  const auto back = ParsePoints(s.str());
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(*back[0].lat, 44.123456789012345);
  EXPECT_FALSE(back[1].lat.has_value());
  EXPECT_FALSE(back[1].speed.has_value());
}

TEST(AssembleTrips, InterpolatesInteriorGap) {
  const UtcTime t = ParseTimestamp("2017-05-09T08:00:00Z");
  const Assembly a = AssembleTrips(std::vector<GpsPoint>{
      Point("A", t, 0, 0), Point("A", t + 10s, {}, {}), Point("A", t + 20s, 0, 0.0002)});
  ASSERT_EQ(a.trips.size(), 1u);
  ASSERT_EQ(a.trips[0].points.size(), 3u);
  EXPECT_NEAR(a.trips[0].points[1].position.lat, 0, 1e-15);
  EXPECT_NEAR(a.trips[0].points[1].position.lon, 0.0001, 1e-15);
  EXPECT_TRUE(a.rejections.empty());
}

TEST(AssembleTrips, SpeedAndAccuracyInterpolateLikeCoordinates) {
  const UtcTime t = ParseTimestamp("2017-05-09T08:00:00Z");
  std::vector<GpsPoint> pts = {Point("A", t, 0, 0), Point("A", t + 30s, 0, 0.001),
                               Point("A", t + 40s, 0, 0.002)};
  pts[0].speed = 2;
  pts[1].speed.reset();
  pts[1].accuracy.reset();
  pts[2].speed = 6;
  pts[2].accuracy = 9;
  const Assembly a = AssembleTrips(pts);
  ASSERT_EQ(a.trips.size(), 1u);
  EXPECT_DOUBLE_EQ(a.trips[0].points[1].speed, 5.0);
  EXPECT_DOUBLE_EQ(a.trips[0].points[1].accuracy, 8.0);
}

TEST(AssembleTrips, RejectionReasons) {
  const UtcTime t = ParseTimestamp("2017-05-09T08:00:00Z");
  const Assembly a = AssembleTrips(std::vector<GpsPoint>{
      Point("single", t, 1, 1),
      Point("zero", t, 1, 1), Point("zero", t, 1, 1.001),
      Point("edge", t, {}, {}), Point("edge", t + 5s, 1, 1), Point("edge", t + 9s, 1, 1.001),
      Point("edge", t + 12s, {}, {})});
  ASSERT_EQ(a.trips.size(), 1u);
  EXPECT_EQ(a.trips[0].trip_id, "edge");
  EXPECT_EQ(a.trips[0].points.size(), 2u);
  std::vector<std::pair<std::string, RejectReason>> got;
  for (const auto& r : a.rejections) got.emplace_back(r.activity_id, r.reason);
  EXPECT_EQ(std::count(got.begin(), got.end(), std::pair{std::string("edge"), RejectReason::kBoundaryMissing}), 2);
  EXPECT_EQ(std::count(got.begin(), got.end(), std::pair{std::string("single"), RejectReason::kTooFewPoints}), 1);
  EXPECT_EQ(std::count(got.begin(), got.end(), std::pair{std::string("zero"), RejectReason::kZeroDuration}), 1);
  EXPECT_EQ(a.rejected_points, 5u);
}

TEST(AssembleTrips, InterleavedActivitiesStaySeparate) {
  const UtcTime t = ParseTimestamp("2017-05-09T08:00:00Z");
  const Assembly a = AssembleTrips(std::vector<GpsPoint>{
      Point("B", t + 20s, 2, 2), Point("A", t, 1, 1), Point("B", t, 2, 2.01),
      Point("A", t + 20s, 1, 1.01)});
  ASSERT_EQ(a.trips.size(), 2u);
  EXPECT_EQ(a.trips[0].trip_id, "A");
  EXPECT_EQ(a.trips[1].trip_id, "B");
  EXPECT_EQ(a.trips[1].start_point, (LatLon{2, 2.01}));
  EXPECT_EQ(a.trips[1].end_point, (LatLon{2, 2}));
}

TEST(TripMetrics, Examples) {
  const UtcTime t = ParseTimestamp("2017-05-09T08:00:00Z");
  const TripMetrics still = ComputeTripMetrics(std::vector<TripPoint>{
      {t, {1, 1}, 0, 0}, {t + 100s, {1, 1}, 0, 0}});
  EXPECT_EQ(still.distance_m, 0);
  EXPECT_EQ(still.duration_s, 100);
  EXPECT_EQ(still.avg_speed_mps, 0);
  const TripMetrics line = ComputeTripMetrics(std::vector<TripPoint>{
      {t, {0, 0}, 0, 0}, {t + 60s, {0, 0.001}, 0, 0}, {t + 120s, {0, 0.002}, 0, 0}});
  EXPECT_NEAR(line.distance_m, 2 * Haversine({0, 0}, {0, 0.001}), 1e-9);
  EXPECT_EQ(line.duration_s, 120);
  EXPECT_THROW(ComputeTripMetrics(std::vector<TripPoint>{{t, {0, 0}, 0, 0}, {t, {0, 1}, 0, 0}}),
               Error);
}

// Random activities with random gaps and timestamp ties: conservation, sort
// idempotence, collinearity of repairs and metric consistency.
TEST(AssembleTrips, Properties) {
  CounterRng rng(DeriveKey(3, 1));
  const UtcTime t0 = ParseTimestamp("2017-05-09T08:00:00Z");
  std::vector<GpsPoint> pts;
  for (int a = 0; a < 200; ++a) {
    const std::string id = "act" + std::to_string(a);
    const int n = 1 + int(rng.Below(12));
    const double lat0 = rng.Uniform(44, 45), lon0 = rng.Uniform(11, 12);
    const double dlat = rng.Uniform(-1e-4, 1e-4), dlon = rng.Uniform(-1e-4, 1e-4);
    int offset = 0;
    for (int i = 0; i < n; ++i) {
      offset += int(rng.Below(20));
      GpsPoint p = Point(id, t0 + std::chrono::seconds(offset), lat0 + dlat * offset,
                         lon0 + dlon * offset);
      if (rng.Uniform() < 0.2) p.lat.reset(), p.lon.reset();
      pts.push_back(p);
    }
  }
  // Globally time-sorted input keeps each activity's tie order.
  std::vector<GpsPoint> presorted = pts;
  std::stable_sort(presorted.begin(), presorted.end(),
                   [](const GpsPoint& a, const GpsPoint& b) { return a.timestamp < b.timestamp; });
  const Assembly sorted = AssembleTrips(pts);
  const Assembly mixed = AssembleTrips(presorted);

  std::size_t kept = 0;
  for (const auto& trip : sorted.trips) {
    kept += trip.points.size();
    ASSERT_GE(trip.points.size(), 2u);
    EXPECT_NEAR(trip.avg_speed_mps * trip.duration_s, trip.distance_m,
                1e-6 * std::max(1.0, trip.distance_m));
    const auto& first = trip.points.front();
    for (const auto& p : trip.points) {
      const double dt = double((p.timestamp - first.timestamp).count());
      const double lat_rate = dt == 0 ? 0 : (p.position.lat - first.position.lat) / dt;
      const double lon_rate = dt == 0 ? 0 : (p.position.lon - first.position.lon) / dt;
      if (dt > 0) {
        // All points of an activity share one (dlat, dlon) per second.
        const auto& last = trip.points.back();
        const double span = double((last.timestamp - first.timestamp).count());
        EXPECT_NEAR(lat_rate, (last.position.lat - first.position.lat) / span, 1e-9);
        EXPECT_NEAR(lon_rate, (last.position.lon - first.position.lon) / span, 1e-9);
      }
    }
  }
  EXPECT_EQ(kept + sorted.rejected_points, pts.size());

  ASSERT_EQ(sorted.trips.size(), mixed.trips.size());
  for (std::size_t i = 0; i < sorted.trips.size(); ++i) {
    EXPECT_EQ(sorted.trips[i].trip_id, mixed.trips[i].trip_id);
    EXPECT_EQ(sorted.trips[i].distance_m, mixed.trips[i].distance_m);
    EXPECT_EQ(sorted.trips[i].points.size(), mixed.trips[i].points.size());
  }
}

TEST(TripFiles, SummaryRoundTrip) {
  const UtcTime t = ParseTimestamp("2017-05-09T08:00:00Z");
  const Assembly a = AssembleTrips(std::vector<GpsPoint>{
      Point("A", t, 44.49, 11.34), Point("A", t + 61s, 44.4912, 11.3413)});
  std::ostringstream s;
  WriteTripSummaries(s, a.trips);
  const std::string path = ::testing::TempDir() + "/trips_roundtrip.csv";
  {
    std::ofstream(path) << s.str();
  }
  const auto back = ReadTripSummaries(path);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].trip_id, "A");
  EXPECT_EQ(back[0].start_time, t);
  EXPECT_EQ(back[0].distance_m, a.trips[0].distance_m);
  EXPECT_EQ(back[0].duration_s, 61);
  EXPECT_TRUE(back[0].points.empty());
}

}  // namespace
}  // namespace velotrace
