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

#pragma once

#include <cmath>
#include <numbers>

namespace velotrace {

inline constexpr double kEarthRadiusM = 6'371'000.0;
inline constexpr double kDegToRad = std::numbers::pi / 180.0;

struct LatLon {
  double lat = 0;
  double lon = 0;

  friend bool operator==(const LatLon&, const LatLon&) = default;
};

inline bool IsValidLatLon(const LatLon& p) {
  return p.lat >= -90 && p.lat <= 90 && p.lon >= -180 && p.lon <= 180;
}

// Great-circle distance in meters on a sphere of radius kEarthRadiusM.
double Haversine(const LatLon& a, const LatLon& b);

// Equirectangular frame anchored at `origin`, using the meters-per-degree of
// `reference_lat` on both axes. Adequate for city-sized boxes.
class LocalFrame {
 public:
  LocalFrame(LatLon origin, double reference_lat)
      : origin_(origin),
        m_per_deg_lat_(kDegToRad * kEarthRadiusM),
        m_per_deg_lon_(kDegToRad * kEarthRadiusM *
                       std::cos(reference_lat * kDegToRad)) {}

  double NorthM(double lat) const { return (lat - origin_.lat) * m_per_deg_lat_; }
  double EastM(double lon) const { return (lon - origin_.lon) * m_per_deg_lon_; }
  LatLon FromMeters(double north_m, double east_m) const {
    return {origin_.lat + north_m / m_per_deg_lat_,
            origin_.lon + east_m / m_per_deg_lon_};
  }
  double m_per_deg_lat() const { return m_per_deg_lat_; }
  double m_per_deg_lon() const { return m_per_deg_lon_; }

 private:
  LatLon origin_;
  double m_per_deg_lat_;
  double m_per_deg_lon_;
};

}  // namespace velotrace
