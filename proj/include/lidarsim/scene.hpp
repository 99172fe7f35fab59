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
 * \file scene.hpp
 * Analytic scenes (ground plane plus axis-aligned boxes) with exact LiDAR
 * response. Used to generate paired appearance / range images whose
 * ground truth is known per ray.
 */
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lidarsim/core.hpp"

namespace lidarsim {

struct Material {
  std::string name;
  Vec3 color;  // RGB in [0,1]
  double reflectance = 0.0;
  bool transparent = false;

  void validate() const;
  friend bool operator==(const Material&, const Material&) = default;
};

struct Box {
  Vec3 min;
  Vec3 max;
  std::size_t material = 0;  // index into Scene::materials

  friend bool operator==(const Box&, const Box&) = default;
};

struct Scene {
  std::vector<Material> materials;
  /// Material of the z = 0 ground plane; no ground when unset.
  std::optional<std::size_t> ground;
  std::vector<Box> boxes;
  /// Sensor (and camera) mount position in the world frame. The sensor frame
  /// is the world frame translated to this point.
  Vec3 sensor_origin{0.0, 0.0, 1.7};

  /// Throws InvalidArgument on a degenerate box or dangling material index.
  void validate() const;

  friend bool operator==(const Scene&, const Scene&) = default;
};

struct Hit {
  double distance = 0.0;
  Vec3 normal;  // unit, facing the ray origin
  std::size_t material = 0;
};

/// Nearest intersection within max_range. Throws InvalidArgument unless
/// |direction| = 1 to within 1e-9.
std::optional<Hit> raycast(const Scene& scene, const Vec3& origin, const Vec3& direction,
                           double max_range);

struct IntensityModel {
  /// Multiply by min(1, 1/d^2) (inverse square normalised at 1 m).
  bool distance_falloff = false;
};

/// reflectance * cos(incidence), clamped to [0,1]. Absent for transparent
/// materials.
std::optional<double> lidar_intensity(const Hit& hit, const Material& material,
                                      const Vec3& direction, const IntensityModel& model = {});

struct Frame {
  AppearanceImage image;
  RangeImage range;
};

/// Appearance by per-pixel camera raycast (base colour, black on a miss or a
/// hit beyond cfg.max_range) and range image by per-cell raycast at the bin
/// centres. Transparent hits and misses are no-return cells.
Frame render_frame(const Scene& scene, const SensorConfig& cfg, const CameraModel& cam,
                   const IntensityModel& model = {});

/// Geometry-only scan: every hit within range returns, with intensity 0.
/// This is what a plain raycasting simulator produces.
RangeImage render_clean_range_image(const Scene& scene, const SensorConfig& cfg);

/// Per-pixel LiDAR response of the surface each camera ray sees: raydrop 1
/// with the lidar intensity on opaque hits within range, 0 otherwise. This is
/// the ideal predictor output for the scene.
PredictorOutput render_response_field(const Scene& scene, const SensorConfig& cfg,
                                      const CameraModel& cam, const IntensityModel& model = {});

/// Six materials with distinct colours, one of them transparent. Entry 0 is
/// the ground.
std::vector<Material> default_palette();

struct SceneBounds {
  std::pair<double, double> x{6.0, 28.0};
  std::pair<double, double> y{-10.0, 10.0};
  std::pair<double, double> depth{0.4, 1.5};   // extent along x
  std::pair<double, double> width{1.0, 5.0};   // extent along y
  std::pair<double, double> height{2.2, 4.5};  // boxes stand on the ground
};

/// Seeded scene: ground from palette[0], boxes with materials drawn from the
/// rest of the palette. Throws InvalidArgument on an empty palette or an
/// inverted count range.
Scene random_scene(std::uint64_t seed, const SceneBounds& bounds = {},
                   std::pair<int, int> box_count = {3, 8},
                   const std::vector<Material>& palette = default_palette());

}  // namespace lidarsim
