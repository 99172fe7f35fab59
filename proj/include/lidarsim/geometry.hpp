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

#pragma once

#include <optional>

#include "lidarsim/core.hpp"

namespace lidarsim {

/// Continuous pixel position (u along width, v along height) and camera depth.
struct PixelCoord {
  double u = 0.0;
  double v = 0.0;
  double z = 0.0;

  friend bool operator==(const PixelCoord&, const PixelCoord&) = default;
};

struct Spherical {
  double azimuth = 0.0;
  double elevation = 0.0;
};

Spherical to_spherical(const Vec3& p);

/// Unit vector for (azimuth, elevation), x forward, z up.
Vec3 direction_from_angles(double azimuth, double elevation);

/// Direction through the centre of range-image cell (row, col).
Vec3 bin_center_direction(const SensorConfig& cfg, std::size_t row, std::size_t col);

/// Bins every point by elevation row and azimuth column. Points outside the
/// angular window or beyond max_range are skipped, and the nearest point
/// wins a shared cell (ties go to the larger intensity, so the result does
/// not depend on point order).
RangeImage pointcloud_to_range_image(const PointCloud& pc, const SensorConfig& cfg);

/// One point per returning cell at its bin-centre direction, row-major order.
/// Reconstruction error is bounded by half a bin in each angle.
PointCloud range_image_to_pointcloud(const RangeImage& ri, const SensorConfig& cfg);

/// Pinhole projection of a sensor-frame point. Absent when the camera-frame
/// depth is <= 1e-6. No image bounds check.
std::optional<PixelCoord> project_to_camera(const Vec3& point, const CameraModel& cam);

/// Unit ray direction (sensor frame) through continuous pixel (u, v).
Vec3 camera_ray_direction(const CameraModel& cam, double u, double v);

/// Bilinear sample at continuous (u, v); integer positions return the stored
/// value. Throws std::out_of_range outside [0, width-1] x [0, height-1].
double sample_bilinear(const GridD& grid, double u, double v);

}  // namespace lidarsim
