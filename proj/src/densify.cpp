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

#include "lidarsim/densify.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace lidarsim {

namespace {

constexpr double kInsideTolerance = -1e-12;

// Twice the signed area of (a, b, p).
double edge(const PixelCoord& a, const PixelCoord& b, double px, double py) {
  return (b.u - a.u) * (py - a.v) - (b.v - a.v) * (px - a.u);
}

bool within_gap(const Triangle& t, const DensifyOptions& opts) {
  if (!opts.max_depth_gap) return true;
  const auto [lo, hi] = std::minmax({t.v[0].pixel.z, t.v[1].pixel.z, t.v[2].pixel.z});
  return hi - lo <= *opts.max_depth_gap;
}

}  // namespace

VertexGrid collect_vertices(const RangeImage& ri, const SensorConfig& cfg,
                            const CameraModel& cam, const DensifyOptions& opts) {
  if (ri.rows() != static_cast<std::size_t>(cfg.rows) ||
      ri.cols() != static_cast<std::size_t>(cfg.cols)) {
    throw InvalidArgument(fmt::format("range image {}x{} does not match sensor {}x{}", ri.rows(),
                                      ri.cols(), cfg.rows, cfg.cols));
  }
  const double u_lo = -0.5 - opts.guard_px;
  const double v_lo = -0.5 - opts.guard_px;
  const double u_hi = cam.width - 0.5 + opts.guard_px;
  const double v_hi = cam.height - 0.5 + opts.guard_px;

  VertexGrid grid(ri.rows(), ri.cols());
  for (std::size_t i = 0; i < ri.rows(); ++i) {
    for (std::size_t j = 0; j < ri.cols(); ++j) {
      const double d = ri.depth(i, j);
      if (d <= 0.0) continue;
      const auto px = project_to_camera(bin_center_direction(cfg, i, j) * d, cam);
      if (!px || px->u < u_lo || px->u > u_hi || px->v < v_lo || px->v > v_hi) continue;
      grid(i, j) = MaskVertex{*px, ri.intensity(i, j), i, j};
    }
  }
  return grid;
}

std::vector<Triangle> mesh_cells(const VertexGrid& vertices, bool wrap,
                                 const DensifyOptions& opts) {
  std::vector<Triangle> out;
  const std::size_t rows = vertices.rows();
  const std::size_t cols = vertices.cols();
  if (rows < 2 || cols < 2) return out;
  const std::size_t last_col = wrap ? cols : cols - 1;

  auto emit = [&](const MaskVertex& a, const MaskVertex& b, const MaskVertex& c) {
    Triangle t{{a, b, c}};
    if (within_gap(t, opts)) out.push_back(t);
  };

  for (std::size_t i = 0; i + 1 < rows; ++i) {
    for (std::size_t j = 0; j < last_col; ++j) {
      const std::size_t jn = (j + 1) % cols;
      const auto& a = vertices(i, j);
      const auto& b = vertices(i, jn);
      const auto& c = vertices(i + 1, j);
      const auto& d = vertices(i + 1, jn);
      const int present = int(a.has_value()) + int(b.has_value()) + int(c.has_value()) +
                          int(d.has_value());
      if (present == 4) {
        emit(*a, *b, *c);
        emit(*c, *b, *d);
      } else if (present == 3 && !a) {
        emit(*c, *b, *d);
      } else if (present == 3 && !d) {
        emit(*a, *b, *c);
      } else if (present == 3) {
        std::array<const MaskVertex*, 3> tri{};
        std::size_t k = 0;
        for (const auto* v : {&a, &b, &c, &d}) {
          if (v->has_value()) tri[k++] = &v->value();
        }
        emit(*tri[0], *tri[1], *tri[2]);
      }
    }
  }
  return out;
}

DenseIntensityMask rasterize(const std::vector<Triangle>& triangles, int width, int height) {
  if (width < 0 || height < 0) throw InvalidArgument("negative raster size");
  DenseIntensityMask mask(static_cast<std::size_t>(height), static_cast<std::size_t>(width));
  if (width == 0 || height == 0) return mask;

  for (const auto& tri : triangles) {
    const auto& p0 = tri.v[0].pixel;
    const auto& p1 = tri.v[1].pixel;
    const auto& p2 = tri.v[2].pixel;
    const double area = edge(p0, p1, p2.u, p2.v);
    if (area == 0.0 || !std::isfinite(area)) continue;

    const auto [min_i, max_i] =
        std::minmax({tri.v[0].intensity, tri.v[1].intensity, tri.v[2].intensity});
    const auto [min_z, max_z] = std::minmax({p0.z, p1.z, p2.z});

    // One extra pixel on each side; the inside test decides coverage.
    const int x_begin = std::max(0, static_cast<int>(std::floor(std::min({p0.u, p1.u, p2.u}))) - 1);
    const int x_end = std::min(width - 1, static_cast<int>(std::ceil(std::max({p0.u, p1.u, p2.u}))) + 1);
    const int y_begin = std::max(0, static_cast<int>(std::floor(std::min({p0.v, p1.v, p2.v}))) - 1);
    const int y_end = std::min(height - 1, static_cast<int>(std::ceil(std::max({p0.v, p1.v, p2.v}))) + 1);

    for (int y = y_begin; y <= y_end; ++y) {
      for (int x = x_begin; x <= x_end; ++x) {
        const double w0 = edge(p1, p2, x, y) / area;
        const double w1 = edge(p2, p0, x, y) / area;
        const double w2 = edge(p0, p1, x, y) / area;
        if (w0 < kInsideTolerance || w1 < kInsideTolerance || w2 < kInsideTolerance) continue;

        const double z = std::clamp(w0 * p0.z + w1 * p1.z + w2 * p2.z, min_z, max_z);
        const double value = std::clamp(
            w0 * tri.v[0].intensity + w1 * tri.v[1].intensity + w2 * tri.v[2].intensity, min_i,
            max_i);

        double& cur_z = mask.depth(y, x);
        double& cur_value = mask.value(y, x);
        if (cur_z == 0.0 || z < cur_z || (z == cur_z && value < cur_value)) {
          cur_z = z;
          cur_value = value;
        }
      }
    }
  }
  return mask;
}

DenseIntensityMask build_dense_mask(const RangeImage& ri, const SensorConfig& cfg,
                                    const CameraModel& cam, const DensifyOptions& opts) {
  const auto vertices = collect_vertices(ri, cfg, cam, opts);
  return rasterize(mesh_cells(vertices, wraps(cfg), opts), cam.width, cam.height);
}

}  // namespace lidarsim
