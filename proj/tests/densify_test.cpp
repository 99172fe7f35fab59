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

#include <gtest/gtest.h>

#include <algorithm>

#include "lidarsim/densify.hpp"
#include "lidarsim/geometry.hpp"
#include "oracles.hpp"

namespace lidarsim {
namespace {

// 3 x 5 sensor whose centre cell looks straight down the optical axis.
SensorConfig axis_config() {
  return SensorConfig("axis", 3, 5, deg2rad(-3.0), deg2rad(3.0), deg2rad(-5.0), deg2rad(5.0),
                      50.0);
}

SensorConfig wall_config() {
  return SensorConfig("wall", 12, 16, deg2rad(-12.0), deg2rad(12.0), deg2rad(-20.0),
                      deg2rad(20.0), 50.0);
}

RangeImage frontal_wall(const SensorConfig& cfg, double distance, double intensity) {
  RangeImage ri(cfg);
  for (std::size_t i = 0; i < ri.rows(); ++i) {
    for (std::size_t j = 0; j < ri.cols(); ++j) {
      const Vec3 d = bin_center_direction(cfg, i, j);
      ri.depth(i, j) = distance / d.x;
      ri.intensity(i, j) = intensity;
    }
  }
  return ri;
}

MaskVertex vertex(double u, double v, double z, double intensity) {
  return MaskVertex{{u, v, z}, intensity, 0, 0};
}

TEST(CollectVertices, AllZero) {
  const auto grid = collect_vertices(RangeImage(axis_config()), axis_config(), CameraModel{});
  for (const auto& v : grid.data()) EXPECT_FALSE(v.has_value());
}

TEST(CollectVertices, OpticalAxisReturn) {
  const CameraModel cam = CameraModel::centered(64, 32, 50.0);
  RangeImage ri(axis_config());
  ri.depth(1, 2) = 8.0;
  ri.intensity(1, 2) = 0.4;
  const auto grid = collect_vertices(ri, axis_config(), cam);
  std::size_t present = 0;
  for (const auto& v : grid.data()) present += v.has_value() ? 1 : 0;
  ASSERT_EQ(present, 1u);
  ASSERT_TRUE(grid(1, 2));
  EXPECT_NEAR(grid(1, 2)->pixel.u, cam.cx, 1e-9);
  EXPECT_NEAR(grid(1, 2)->pixel.v, cam.cy, 1e-9);
  EXPECT_NEAR(grid(1, 2)->pixel.z, 8.0, 1e-9);
  EXPECT_EQ(grid(1, 2)->intensity, 0.4);
}

TEST(CollectVertices, BehindCameraAbsent) {
  const SensorConfig cfg("ring", 1, 4, deg2rad(-1.0), deg2rad(1.0), -kPi, kPi, 50.0);
  RangeImage ri(cfg);
  ri.depth(0, 0) = 5.0;  // azimuth -135 deg
  const auto grid = collect_vertices(ri, cfg, CameraModel{});
  EXPECT_FALSE(grid(0, 0));
}

TEST(CollectVertices, GuardMargin) {
  const CameraModel cam = CameraModel::centered(64, 32, 50.0);
  const SensorConfig cfg("wide", 1, 9, deg2rad(-1.0), deg2rad(1.0), deg2rad(-45.0),
                         deg2rad(45.0), 50.0);
  const RangeImage ri = frontal_wall(cfg, 10.0, 0.5);
  const auto grid = collect_vertices(ri, cfg, cam);
  for (std::size_t j = 0; j < 9; ++j) {
    const auto px = project_to_camera(bin_center_direction(cfg, 0, j) * ri.depth(0, j), cam);
    const bool inside = px->u >= -1.5 && px->u <= 64.5;
    EXPECT_EQ(grid(0, j).has_value(), inside) << j;
  }
}

VertexGrid square(int present_mask) {
  VertexGrid g(2, 2);
  const double uv[4][2] = {{0, 0}, {4, 0}, {0, 4}, {4, 4}};
  for (int k = 0; k < 4; ++k) {
    if (present_mask & (1 << k)) g(k / 2, k % 2) = vertex(uv[k][0], uv[k][1], 5.0, 0.5);
  }
  return g;
}

TEST(MeshCells, FourPresent) {
  const auto tris = mesh_cells(square(0b1111), false);
  ASSERT_EQ(tris.size(), 2u);
  // (A, B, C) then (C, B, D)
  EXPECT_EQ(tris[0].v[0].pixel.u, 0.0);
  EXPECT_EQ(tris[0].v[1].pixel.u, 4.0);
  EXPECT_EQ(tris[0].v[2].pixel.v, 4.0);
  EXPECT_EQ(tris[1].v[0].pixel.u, 0.0);
  EXPECT_EQ(tris[1].v[0].pixel.v, 4.0);
  EXPECT_EQ(tris[1].v[2].pixel.u, 4.0);
  EXPECT_EQ(tris[1].v[2].pixel.v, 4.0);
}

TEST(MeshCells, ThreePresent) {
  for (int missing = 0; missing < 4; ++missing) {
    EXPECT_EQ(mesh_cells(square(0b1111 & ~(1 << missing)), false).size(), 1u);
  }
}

TEST(MeshCells, MissingDiagonalCornerKeepsOtherTriangle) {
  const auto full = mesh_cells(square(0b1111), false);
  const auto no_a = mesh_cells(square(0b1110), false);
  const auto no_d = mesh_cells(square(0b0111), false);
  for (int k = 0; k < 3; ++k) {
    EXPECT_EQ(no_a[0].v[k].pixel, full[1].v[k].pixel) << k;
    EXPECT_EQ(no_d[0].v[k].pixel, full[0].v[k].pixel) << k;
  }
}

TEST(MeshCells, TwoOrFewerPresent) {
  for (int m = 0; m < 16; ++m) {
    if (__builtin_popcount(m) <= 2) EXPECT_EQ(mesh_cells(square(m), false).size(), 0u) << m;
  }
}

TEST(MeshCells, WrapJoinsLastAndFirstColumn) {
  VertexGrid g(2, 3);
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 3; ++j) g(i, j) = vertex(double(j), double(i), 5.0, 0.5);
  }
  EXPECT_EQ(mesh_cells(g, false).size(), 4u);
  EXPECT_EQ(mesh_cells(g, true).size(), 6u);
}

TEST(MeshCells, DepthGap) {
  VertexGrid g = square(0b1111);
  g(1, 1)->pixel.z = 9.0;
  DensifyOptions opts;
  opts.max_depth_gap = 1.0;
  EXPECT_EQ(mesh_cells(g, false, opts).size(), 1u);
  EXPECT_EQ(mesh_cells(g, false).size(), 2u);
}

TEST(Rasterize, Empty) {
  const auto m = rasterize({}, 8, 4);
  EXPECT_EQ(m, DenseIntensityMask(4, 8));
}

TEST(Rasterize, ConstantField) {
  const Triangle t{{vertex(1, 1, 3, 0.6), vertex(9, 1, 3, 0.6), vertex(1, 9, 3, 0.6)}};
  const auto m = rasterize({t}, 12, 12);
  std::size_t covered = 0;
  for (int y = 0; y < 12; ++y) {
    for (int x = 0; x < 12; ++x) {
      const bool inside = x >= 1 && y >= 1 && x + y <= 10;
      EXPECT_EQ(m.depth(y, x) > 0.0, inside) << x << "," << y;
      if (inside) {
        EXPECT_EQ(m.value(y, x), 0.6);
        ++covered;
      }
    }
  }
  EXPECT_EQ(covered, 45u);
}

TEST(Rasterize, CentroidValue) {
  // Centroid at (5, 4) lands on a pixel centre.
  const Triangle t{{vertex(1, 1, 2, 0.0), vertex(10, 1, 2, 0.0), vertex(4, 10, 2, 1.0)}};
  const auto m = rasterize({t}, 12, 12);
  EXPECT_NEAR(m.value(4, 5), 1.0 / 3.0, 1e-12);
  const auto ref = oracle::rasterize({t}, 12, 12);
  for (std::size_t k = 0; k < m.value.size(); ++k) {
    EXPECT_NEAR(m.value.data()[k], ref.value.data()[k], 1e-12);
    EXPECT_EQ(m.depth.data()[k] > 0.0, ref.depth.data()[k] > 0.0);
  }
}

TEST(Rasterize, NearerTriangleWins) {
  const Triangle far{{vertex(0, 0, 9, 0.2), vertex(10, 0, 9, 0.2), vertex(0, 10, 9, 0.2)}};
  const Triangle near{{vertex(0, 0, 4, 0.8), vertex(6, 0, 4, 0.8), vertex(0, 6, 4, 0.8)}};
  const auto a = rasterize({far, near}, 12, 12);
  const auto b = rasterize({near, far}, 12, 12);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.value(1, 1), 0.8);
  EXPECT_EQ(a.value(1, 8), 0.2);
}

TEST(Rasterize, MatchesOracleAndOrderFree) {
  Rng rng(21);
  for (int trial = 0; trial < 40; ++trial) {
    const int w = 8 + static_cast<int>(rng.index(40));
    const int h = 8 + static_cast<int>(rng.index(40));
    auto tris = oracle::random_triangles(rng, 1 + static_cast<int>(rng.index(20)), w, h);
    const auto m = rasterize(tris, w, h);
    const auto ref = oracle::rasterize(tris, w, h);
    for (std::size_t k = 0; k < m.value.size(); ++k) {
      ASSERT_EQ(m.depth.data()[k] > 0.0, ref.depth.data()[k] > 0.0);
      ASSERT_NEAR(m.depth.data()[k], ref.depth.data()[k], 1e-9);
      ASSERT_NEAR(m.value.data()[k], ref.value.data()[k], 1e-9);
    }
    rng.shuffle(tris);
    EXPECT_EQ(rasterize(tris, w, h), m);
  }
}

TEST(BuildDenseMask, AllZero) {
  const CameraModel cam = CameraModel::centered(32, 16, 20.0);
  EXPECT_EQ(build_dense_mask(RangeImage(wall_config()), wall_config(), cam),
            DenseIntensityMask(16, 32));
}

TEST(BuildDenseMask, FrontalWall) {
  const CameraModel cam = CameraModel::centered(64, 32, 40.0);
  const SensorConfig cfg = wall_config();
  const RangeImage ri = frontal_wall(cfg, 10.0, 0.5);
  const auto m = build_dense_mask(ri, cfg, cam);
  const auto ref = oracle::rasterize(mesh_cells(collect_vertices(ri, cfg, cam), false),
                                     cam.width, cam.height);
  std::size_t covered = 0;
  for (std::size_t k = 0; k < m.value.size(); ++k) {
    ASSERT_EQ(m.depth.data()[k] > 0.0, ref.depth.data()[k] > 0.0);
    if (m.depth.data()[k] > 0.0) {
      EXPECT_EQ(m.value.data()[k], 0.5);
      ++covered;
    } else {
      EXPECT_EQ(m.value.data()[k], 0.0);
    }
  }
  EXPECT_GT(covered, 0u);
  // every row of the filled region is one contiguous run
  for (int y = 0; y < cam.height; ++y) {
    int runs = 0;
    for (int x = 0; x < cam.width; ++x) {
      if (m.depth(y, x) > 0.0 && (x == 0 || m.depth(y, x - 1) == 0.0)) ++runs;
    }
    EXPECT_LE(runs, 1);
  }
}

TEST(BuildDenseMask, MissingCellLeavesLocalHole) {
  const CameraModel cam = CameraModel::centered(64, 32, 40.0);
  const SensorConfig cfg = wall_config();
  RangeImage ri = frontal_wall(cfg, 10.0, 0.5);
  const auto base = build_dense_mask(ri, cfg, cam);
  const auto vertices = collect_vertices(ri, cfg, cam);
  std::vector<Triangle> incident;
  for (const auto& t : mesh_cells(vertices, false)) {
    for (const auto& v : t.v) {
      if (v.row == 6 && v.col == 8) incident.push_back(t);
    }
  }
  ASSERT_EQ(incident.size(), 6u);

  ri.depth(6, 8) = 0.0;
  ri.intensity(6, 8) = 0.0;
  const auto holed = build_dense_mask(ri, cfg, cam);
  std::size_t changed = 0;
  for (int y = 0; y < cam.height; ++y) {
    for (int x = 0; x < cam.width; ++x) {
      if (holed.value(y, x) == base.value(y, x) && holed.depth(y, x) == base.depth(y, x)) continue;
      ++changed;
      const bool in_region = std::any_of(incident.begin(), incident.end(), [&](const Triangle& t) {
        return oracle::covers(t, x, y, nullptr);
      });
      EXPECT_TRUE(in_region) << x << "," << y;
    }
  }
  EXPECT_GT(changed, 0u);
}

TEST(BuildDenseMask, CoverageMonotone) {
  const CameraModel cam = CameraModel::centered(64, 32, 40.0);
  const SensorConfig cfg = wall_config();
  RangeImage ri = frontal_wall(cfg, 10.0, 0.5);
  Rng rng(4);
  auto prev = build_dense_mask(ri, cfg, cam);
  for (int k = 0; k < 30; ++k) {
    const std::size_t i = rng.index(ri.rows());
    const std::size_t j = rng.index(ri.cols());
    ri.depth(i, j) = 0.0;
    ri.intensity(i, j) = 0.0;
    const auto next = build_dense_mask(ri, cfg, cam);
    for (std::size_t p = 0; p < next.depth.size(); ++p) {
      if (next.depth.data()[p] > 0.0) ASSERT_GT(prev.depth.data()[p], 0.0);
    }
    prev = next;
  }
}

}  // namespace
}  // namespace lidarsim
