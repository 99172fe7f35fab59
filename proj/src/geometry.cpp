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

#include "lidarsim/geometry.hpp"

#include <fmt/format.h>

#include <cmath>

namespace lidarsim {

Spherical to_spherical(const Vec3& p) {
  return {std::atan2(p.y, p.x), std::atan2(p.z, std::sqrt(p.x * p.x + p.y * p.y))};
}

Vec3 direction_from_angles(double azimuth, double elevation) {
  const double ce = std::cos(elevation);
  return {ce * std::cos(azimuth), ce * std::sin(azimuth), std::sin(elevation)};
}

Vec3 bin_center_direction(const SensorConfig& cfg, std::size_t row, std::size_t col) {
  const double elevation = cfg.elev_max - (static_cast<double>(row) + 0.5) * cfg.elev_step();
  const double azimuth = cfg.az_min + (static_cast<double>(col) + 0.5) * cfg.az_step();
  return direction_from_angles(azimuth, elevation);
}

RangeImage pointcloud_to_range_image(const PointCloud& pc, const SensorConfig& cfg) {
  RangeImage ri(cfg);
  const double d_elev = cfg.elev_step();
  const double d_az = cfg.az_step();
  const bool full_circle = wraps(cfg);

  for (const auto& p : pc.points) {
    const double dist = p.position().norm();
    if (!(dist > 0.0) || dist > cfg.max_range) continue;

    const auto sph = to_spherical(p.position());
    const double row_f = std::floor((cfg.elev_max - sph.elevation) / d_elev);
    if (row_f < 0.0 || row_f >= cfg.rows) continue;

    // atan2 returns [-pi, pi]; shift into [az_min, az_min + 2pi).
    double rel = sph.azimuth - cfg.az_min;
    rel = std::fmod(rel, 2.0 * kPi);
    if (rel < 0.0) rel += 2.0 * kPi;
    double col_f = std::floor(rel / d_az);
    if (col_f >= cfg.cols) {
      if (!full_circle) continue;
      col_f = 0.0;
    }

    const auto row = static_cast<std::size_t>(row_f);
    const auto col = static_cast<std::size_t>(col_f);
    double& cell_depth = ri.depth(row, col);
    double& cell_intensity = ri.intensity(row, col);
    const bool better = cell_depth == 0.0 || dist < cell_depth ||
                        (dist == cell_depth && p.intensity > cell_intensity);
    if (better) {
      cell_depth = dist;
      cell_intensity = p.intensity;
    }
  }
  return ri;
}

PointCloud range_image_to_pointcloud(const RangeImage& ri, const SensorConfig& cfg) {
  if (ri.rows() != static_cast<std::size_t>(cfg.rows) ||
      ri.cols() != static_cast<std::size_t>(cfg.cols) || !ri.intensity.same_shape(ri.depth)) {
    throw InvalidArgument(fmt::format("range image {}x{} does not match sensor {}x{}", ri.rows(),
                                      ri.cols(), cfg.rows, cfg.cols));
  }
  PointCloud pc;
  for (std::size_t i = 0; i < ri.rows(); ++i) {
    for (std::size_t j = 0; j < ri.cols(); ++j) {
      const double d = ri.depth(i, j);
      if (d <= 0.0) continue;
      const Vec3 p = bin_center_direction(cfg, i, j) * d;
      pc.points.push_back({p.x, p.y, p.z, ri.intensity(i, j)});
    }
  }
  return pc;
}

std::optional<PixelCoord> project_to_camera(const Vec3& point, const CameraModel& cam) {
  const Vec3 c = cam.extrinsic.apply(point);
  if (c.z <= 1e-6) return std::nullopt;
  return PixelCoord{cam.fx * c.x / c.z + cam.cx, cam.fy * c.y / c.z + cam.cy, c.z};
}

Vec3 camera_ray_direction(const CameraModel& cam, double u, double v) {
  const Vec3 in_camera{(u - cam.cx) / cam.fx, (v - cam.cy) / cam.fy, 1.0};
  return cam.extrinsic.rotate_inverse(in_camera.normalized());
}

namespace {

double lerp(double a, double b, double t) { return a + (b - a) * t; }

}  // namespace

double sample_bilinear(const GridD& grid, double u, double v) {
  const double max_u = static_cast<double>(grid.cols()) - 1.0;
  const double max_v = static_cast<double>(grid.rows()) - 1.0;
  if (grid.empty() || !(u >= 0.0 && u <= max_u && v >= 0.0 && v <= max_v)) {
    throw std::out_of_range(fmt::format("bilinear sample ({}, {}) outside {}x{} grid", u, v,
                                        grid.cols(), grid.rows()));
  }
  // On the far edge x0 is the last column and tx == 0.
  const auto x0 = static_cast<std::size_t>(std::floor(u));
  const auto y0 = static_cast<std::size_t>(std::floor(v));
  const std::size_t x1 = std::min(x0 + 1, grid.cols() - 1);
  const std::size_t y1 = std::min(y0 + 1, grid.rows() - 1);
  const double tx = u - static_cast<double>(x0);
  const double ty = v - static_cast<double>(y0);
  const double top = lerp(grid(y0, x0), grid(y0, x1), tx);
  const double bottom = lerp(grid(y1, x0), grid(y1, x1), tx);
  return lerp(top, bottom, ty);
}

}  // namespace lidarsim
