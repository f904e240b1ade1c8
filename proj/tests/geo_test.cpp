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

#include <cmath>
#include <numbers>

#include "velotrace/geo.hpp"
#include "velotrace/rng.hpp"

namespace velotrace {
namespace {

// Chord length between unit vectors, converted to an arc on the same sphere.
double ChordDistance(LatLon a, LatLon b) {
  const double d = std::numbers::pi / 180;
  auto unit = [&](LatLon p) {
    return std::array{std::cos(p.lat * d) * std::cos(p.lon * d),
                      std::cos(p.lat * d) * std::sin(p.lon * d), std::sin(p.lat * d)};
  };
  const auto u = unit(a), v = unit(b);
  const double chord = std::hypot(u[0] - v[0], u[1] - v[1], u[2] - v[2]);
  return 2 * 6371000.0 * std::asin(chord / 2);
}

TEST(Haversine, KnownValues) {
  const LatLon bologna{44.4939, 11.3428};
  EXPECT_EQ(Haversine(bologna, bologna), 0.0);
  EXPECT_NEAR(Haversine({0, 0}, {0, 1}), 111194.93, 0.01);
  // Independent chord-based oracle, pinned: 1323.31 m.
  const LatLon north{44.5058, 11.3426};
  EXPECT_NEAR(ChordDistance(bologna, north), 1323.31, 0.01);
  EXPECT_NEAR(Haversine(bologna, north), 1323.31, 1323.31 * 1e-3);
}

TEST(Haversine, SymmetryAndTriangleInequality) {
  CounterRng rng(DeriveKey(11, 0));
  for (int i = 0; i < 2000; ++i) {
    const LatLon a{rng.Uniform(-90, 90), rng.Uniform(-180, 180)};
    const LatLon b{rng.Uniform(-90, 90), rng.Uniform(-180, 180)};
    const LatLon c{rng.Uniform(-90, 90), rng.Uniform(-180, 180)};
    const double ab = Haversine(a, b);
    EXPECT_GE(ab, 0);
    EXPECT_DOUBLE_EQ(ab, Haversine(b, a));
    EXPECT_LE(Haversine(a, c), ab + Haversine(b, c) + 1e-6);
  }
}

TEST(LocalFrame, RoundTripsMeters) {
  const LocalFrame f({44.46, 11.28}, 44.495);
  const LatLon p = f.FromMeters(1234.5, -678.9);
  EXPECT_NEAR(f.NorthM(p.lat), 1234.5, 1e-9);
  EXPECT_NEAR(f.EastM(p.lon), -678.9, 1e-9);
}

TEST(Geo, ValidRanges) {
  EXPECT_TRUE(IsValidLatLon({90, -180}));
  EXPECT_FALSE(IsValidLatLon({90.0001, 0}));
  EXPECT_FALSE(IsValidLatLon({0, 180.5}));
}

}  // namespace
}  // namespace velotrace
