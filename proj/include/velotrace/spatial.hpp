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

// Usage-density grids and hub destination spreading.

#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "velotrace/geo.hpp"
#include "velotrace/ingest.hpp"

namespace velotrace {

struct BBox {
  double min_lat = 0;
  double min_lon = 0;
  double max_lat = 0;
  double max_lon = 0;

  bool Contains(const LatLon& p) const {
    return p.lat >= min_lat && p.lat <= max_lat && p.lon >= min_lon &&
           p.lon <= max_lon;
  }
  LatLon Center() const {
    return {(min_lat + max_lat) / 2, (min_lon + max_lon) / 2};
  }
};

struct DensityGrid {
  BBox bbox;
  double cell_size_m = 0;
  int n_rows = 0;
  int n_cols = 0;
  std::vector<std::uint64_t> counts;  // row-major, row 0 = southernmost
  std::vector<double> normalized;     // counts / max(counts), or zeros
  std::uint64_t ignored = 0;          // points outside the bbox

  std::uint64_t count(int row, int col) const {
    return counts[std::size_t(row) * std::size_t(n_cols) + std::size_t(col)];
  }
  double norm(int row, int col) const {
    return normalized[std::size_t(row) * std::size_t(n_cols) + std::size_t(col)];
  }
};

// Throws Error(kParameter) for a degenerate bbox or non-positive cell size.
DensityGrid BuildDensityGrid(std::span<const LatLon> points, const BBox& bbox,
                             double cell_size_m);

struct SignedGrid {
  int n_rows = 0;
  int n_cols = 0;
  std::vector<double> values;
};

// a.normalized - b.normalized; throws Error(kParameter) on shape mismatch.
SignedGrid GridDiff(const DensityGrid& a, const DensityGrid& b);

void WriteDensityCsv(std::ostream& out, const DensityGrid& grid);

struct Hub {
  std::string name;
  LatLon center;
  double radius_m = 300;
};

// `name,lat,lon,radius_m`
std::vector<Hub> ReadHubsFile(const std::filesystem::path& path);

struct RankedDestination {
  long long row = 0;
  long long col = 0;
  LatLon cell_center;
  std::uint64_t trip_count = 0;
  int rank = 0;
};

struct HubSpreadReport {
  std::string hub_name;
  LatLon hub_center;
  double hub_radius_m = 0;
  std::string period;
  double dest_cell_size_m = 0;
  std::vector<RankedDestination> destinations;
  std::uint64_t total_trips_from_hub = 0;
};

// Trips starting within the closed disk around the hub; end points binned
// into cells of a grid anchored at the hub center; top_k cells by count,
// ties by (row, col).
HubSpreadReport HubSpread(std::span<const Trip> trips, const Hub& hub,
                          double dest_cell_size_m, int top_k,
                          std::string period = "all");

std::string HubReportsToJson(std::span<const HubSpreadReport> reports);

}  // namespace velotrace
