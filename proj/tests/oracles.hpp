// Copyright 2026 The lidarsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Independent reference computations shared by the unit and acceptance tests.
#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "lidarsim/core.hpp"
#include "lidarsim/densify.hpp"
#include "lidarsim/rng.hpp"

namespace lidarsim::oracle {

struct Barycentric {
  double b0, b1, b2;
};

// Cramer's rule on the 2x2 system for (b1, b2); b0 = 1 - b1 - b2.
inline bool barycentric(const Triangle& t, double px, double py, Barycentric* out) {
  const double x0 = t.v[0].pixel.u, y0 = t.v[0].pixel.v;
  const double ax = t.v[1].pixel.u - x0, ay = t.v[1].pixel.v - y0;
  const double bx = t.v[2].pixel.u - x0, by = t.v[2].pixel.v - y0;
  const double det = ax * by - bx * ay;
  if (det == 0.0) return false;
  const double rx = px - x0, ry = py - y0;
  const double b1 = (rx * by - bx * ry) / det;
  const double b2 = (ax * ry - rx * ay) / det;
  *out = {1.0 - b1 - b2, b1, b2};
  return true;
}

inline bool covers(const Triangle& t, double px, double py, Barycentric* b) {
  Barycentric tmp{};
  if (!barycentric(t, px, py, &tmp)) return false;
  if (tmp.b0 < -1e-12 || tmp.b1 < -1e-12 || tmp.b2 < -1e-12) return false;
  if (b) *b = tmp;
  return true;
}

// Every pixel centre against every triangle; nearest depth wins, ties to the
// smaller value.
inline DenseIntensityMask rasterize(const std::vector<Triangle>& tris, int width, int height) {
  DenseIntensityMask m(static_cast<std::size_t>(height), static_cast<std::size_t>(width));
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      bool hit = false;
      double best_z = 0.0, best_value = 0.0;
      for (const auto& t : tris) {
        Barycentric b{};
        if (!covers(t, x, y, &b)) continue;
        const double z = b.b0 * t.v[0].pixel.z + b.b1 * t.v[1].pixel.z + b.b2 * t.v[2].pixel.z;
        const double value =
            b.b0 * t.v[0].intensity + b.b1 * t.v[1].intensity + b.b2 * t.v[2].intensity;
        if (!hit || z < best_z || (z == best_z && value < best_value)) {
          hit = true;
          best_z = z;
          best_value = value;
        }
      }
      if (hit) {
        m.depth(y, x) = best_z;
        m.value(y, x) = best_value;
      }
    }
  }
  return m;
}

// Vertices on a 1/8 pixel lattice so that pixel centres can fall exactly on
// edges; depths in [1, 50].
inline std::vector<Triangle> random_triangles(Rng& rng, int count, int width, int height) {
  auto coord = [&](int extent) {
    return std::round(rng.uniform(-2.0, extent + 1.0) * 8.0) / 8.0;
  };
  std::vector<Triangle> tris;
  for (int k = 0; k < count; ++k) {
    Triangle t;
    for (auto& v : t.v) {
      v.pixel = {coord(width), coord(height), rng.uniform(1.0, 50.0)};
      v.intensity = rng.uniform();
    }
    tris.push_back(t);
  }
  return tris;
}

}  // namespace lidarsim::oracle
