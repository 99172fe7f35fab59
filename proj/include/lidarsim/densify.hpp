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

/**
 * \file densify.hpp
 * Dense intensity mask construction. Neighbouring range-image returns are
 * meshed into triangles in camera space and rasterized with a z-buffer;
 * a missing return leaves a hole in the mask.
 */
#pragma once

#include <optional>
#include <vector>

#include "lidarsim/core.hpp"
#include "lidarsim/geometry.hpp"

namespace lidarsim {

struct MaskVertex {
  PixelCoord pixel;
  double intensity = 0.0;
  std::size_t row = 0;
  std::size_t col = 0;
};

struct Triangle {
  std::array<MaskVertex, 3> v;
};

using VertexGrid = Grid<std::optional<MaskVertex>>;

struct DensifyOptions {
  /// Projections up to this many pixels outside the image are still kept as
  /// vertices, so triangles reach the border pixels.
  double guard_px = 1.0;
  /// Suppress triangles whose vertex camera depths differ by more than this
  /// (meters). Disabled when unset.
  std::optional<double> max_depth_gap;
};

VertexGrid collect_vertices(const RangeImage& ri, const SensorConfig& cfg,
                            const CameraModel& cam, const DensifyOptions& opts = {});

/// Triangulates every 2x2 window {A=(i,j), B=(i,j+1), C=(i+1,j), D=(i+1,j+1)}:
/// four present cells give (A,B,C) and (C,B,D); exactly three give that one
/// triangle; fewer give nothing. With `wrap`, column cols-1 neighbours 0.
std::vector<Triangle> mesh_cells(const VertexGrid& vertices, bool wrap,
                                 const DensifyOptions& opts = {});

/// Z-buffered rasterization. A pixel centre (x, y) is covered when all three
/// barycentric weights are >= -1e-12; intensity and depth interpolate
/// linearly in screen space. The nearer surface wins a pixel; equal depths
/// fall back to the smaller intensity, so output is independent of triangle
/// order.
DenseIntensityMask rasterize(const std::vector<Triangle>& triangles, int width, int height);

DenseIntensityMask build_dense_mask(const RangeImage& ri, const SensorConfig& cfg,
                                    const CameraModel& cam, const DensifyOptions& opts = {});

}  // namespace lidarsim
