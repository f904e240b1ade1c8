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

#include "velotrace/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <nlohmann/json.hpp>

#include "velotrace/csv.hpp"
#include "velotrace/error.hpp"

namespace velotrace {

DensityGrid BuildDensityGrid(std::span<const LatLon> points, const BBox& bbox,
                             double cell_size_m) {
  if (!(bbox.min_lat < bbox.max_lat) || !(bbox.min_lon < bbox.max_lon)) {
    throw Error(ErrorKind::kParameter, "degenerate bounding box");
  }
  if (!(cell_size_m > 0)) {
    throw Error(ErrorKind::kParameter, "cell size must be positive");
  }
  const LocalFrame frame({bbox.min_lat, bbox.min_lon}, bbox.Center().lat);
  DensityGrid g;
  g.bbox = bbox;
  g.cell_size_m = cell_size_m;
  g.n_rows = std::max(1, int(std::ceil(frame.NorthM(bbox.max_lat) / cell_size_m)));
  g.n_cols = std::max(1, int(std::ceil(frame.EastM(bbox.max_lon) / cell_size_m)));
  g.counts.assign(std::size_t(g.n_rows) * std::size_t(g.n_cols), 0);
  for (const auto& p : points) {
    if (!bbox.Contains(p)) {
      ++g.ignored;
      continue;
    }
    const int row = std::min(g.n_rows - 1, int(frame.NorthM(p.lat) / cell_size_m));
    const int col = std::min(g.n_cols - 1, int(frame.EastM(p.lon) / cell_size_m));
    ++g.counts[std::size_t(row) * std::size_t(g.n_cols) + std::size_t(col)];
  }
  const std::uint64_t peak =
      g.counts.empty() ? 0 : *std::max_element(g.counts.begin(), g.counts.end());
  g.normalized.resize(g.counts.size());
  for (std::size_t i = 0; i < g.counts.size(); ++i) {
    g.normalized[i] = peak > 0 ? double(g.counts[i]) / double(peak) : 0.0;
  }
  return g;
}

SignedGrid GridDiff(const DensityGrid& a, const DensityGrid& b) {
  const bool same_box = a.bbox.min_lat == b.bbox.min_lat &&
                        a.bbox.min_lon == b.bbox.min_lon &&
                        a.bbox.max_lat == b.bbox.max_lat &&
                        a.bbox.max_lon == b.bbox.max_lon;
  if (!same_box || a.cell_size_m != b.cell_size_m || a.n_rows != b.n_rows ||
      a.n_cols != b.n_cols) {
    throw Error(ErrorKind::kParameter, "grid shapes differ");
  }
  SignedGrid d{a.n_rows, a.n_cols, std::vector<double>(a.normalized.size())};
  for (std::size_t i = 0; i < d.values.size(); ++i) {
    d.values[i] = a.normalized[i] - b.normalized[i];
  }
  return d;
}

void WriteDensityCsv(std::ostream& out, const DensityGrid& grid) {
  CsvWriter w(out);
  w.Row({"row", "col", "count", "normalized"});
  for (int r = 0; r < grid.n_rows; ++r) {
    for (int c = 0; c < grid.n_cols; ++c) {
      if (grid.count(r, c) == 0) continue;
      w.Row({std::to_string(r), std::to_string(c), std::to_string(grid.count(r, c)),
             FormatDouble(grid.norm(r, c))});
    }
  }
}

std::vector<Hub> ReadHubsFile(const std::filesystem::path& path) {
  CsvReader reader = CsvReader::FromFile(path);
  reader.ExpectHeader({"name", "lat", "lon", "radius_m"});
  std::vector<Hub> hubs;
  while (reader.Next()) {
    const std::string where = "line " + std::to_string(reader.line()) + ": ";
    if (reader.size() != 4) throw Error(ErrorKind::kSchema, where + "expected 4 fields");
    auto lat = ParseDouble(reader[1]);
    auto lon = ParseDouble(reader[2]);
    auto radius = ParseDouble(reader[3]);
    if (!lat || !lon || !radius) throw Error(ErrorKind::kInput, where + "bad number");
    if (!IsValidLatLon({*lat, *lon})) throw Error(ErrorKind::kRange, where + "bad coordinate");
    if (*radius <= 0) throw Error(ErrorKind::kRange, where + "radius must be positive");
    hubs.push_back({std::string(reader[0]), {*lat, *lon}, *radius});
  }
  return hubs;
}

HubSpreadReport HubSpread(std::span<const Trip> trips, const Hub& hub,
                          double dest_cell_size_m, int top_k,
                          std::string period) {
  if (!(hub.radius_m > 0)) throw Error(ErrorKind::kParameter, "hub radius must be positive");
  if (top_k < 1) throw Error(ErrorKind::kParameter, "top_k must be >= 1");
  if (!(dest_cell_size_m > 0)) {
    throw Error(ErrorKind::kParameter, "destination cell size must be positive");
  }
  HubSpreadReport report;
  report.hub_name = hub.name;
  report.hub_center = hub.center;
  report.hub_radius_m = hub.radius_m;
  report.period = std::move(period);
  report.dest_cell_size_m = dest_cell_size_m;

  const LocalFrame frame(hub.center, hub.center.lat);
  std::map<std::pair<long long, long long>, std::uint64_t> cells;
  for (const auto& t : trips) {
    if (Haversine(t.start_point, hub.center) > hub.radius_m) continue;
    ++report.total_trips_from_hub;
    const auto row = (long long)std::floor(frame.NorthM(t.end_point.lat) / dest_cell_size_m);
    const auto col = (long long)std::floor(frame.EastM(t.end_point.lon) / dest_cell_size_m);
    ++cells[{row, col}];
  }
  std::vector<RankedDestination> ranked;
  ranked.reserve(cells.size());
  for (const auto& [rc, count] : cells) {
    RankedDestination d;
    d.row = rc.first;
    d.col = rc.second;
    d.cell_center = frame.FromMeters((double(rc.first) + 0.5) * dest_cell_size_m,
                                     (double(rc.second) + 0.5) * dest_cell_size_m);
    d.trip_count = count;
    ranked.push_back(d);
  }
  // The map iterates in (row, col) order, so a stable sort on count keeps the
  // tie-break total.
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.trip_count > b.trip_count; });
  if (ranked.size() > std::size_t(top_k)) ranked.resize(std::size_t(top_k));
  for (std::size_t i = 0; i < ranked.size(); ++i) ranked[i].rank = int(i + 1);
  report.destinations = std::move(ranked);
  return report;
}

std::string HubReportsToJson(std::span<const HubSpreadReport> reports) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : reports) {
    nlohmann::ordered_json j;
    j["hub"] = r.hub_name;
    j["hub_center"] = {r.hub_center.lat, r.hub_center.lon};
    j["hub_radius_m"] = r.hub_radius_m;
    j["period"] = r.period;
    j["dest_cell_size_m"] = r.dest_cell_size_m;
    j["total_trips_from_hub"] = r.total_trips_from_hub;
    nlohmann::ordered_json dests = nlohmann::ordered_json::array();
    for (const auto& d : r.destinations) {
      dests.push_back({{"rank", d.rank},
                       {"row", d.row},
                       {"col", d.col},
                       {"cell_center", {d.cell_center.lat, d.cell_center.lon}},
                       {"trip_count", d.trip_count}});
    }
    j["destinations"] = dests;
    arr.push_back(j);
  }
  return arr.dump(2) + "\n";
}

}  // namespace velotrace
