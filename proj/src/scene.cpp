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

#include "lidarsim/scene.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <tuple>

#include "lidarsim/geometry.hpp"
#include "lidarsim/rng.hpp"

namespace lidarsim {

namespace {

constexpr double kHitEpsilon = 1e-12;

double component(const Vec3& v, int axis) { return axis == 0 ? v.x : (axis == 1 ? v.y : v.z); }

std::optional<std::pair<double, Vec3>> intersect_box(const Box& box, const Vec3& o,
                                                     const Vec3& d) {
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  int near_axis = -1;
  for (int axis = 0; axis < 3; ++axis) {
    const double oa = component(o, axis);
    const double da = component(d, axis);
    const double lo = component(box.min, axis);
    const double hi = component(box.max, axis);
    if (da == 0.0) {
      if (oa < lo || oa > hi) return std::nullopt;
      continue;
    }
    double t1 = (lo - oa) / da;
    double t2 = (hi - oa) / da;
    if (t1 > t2) std::swap(t1, t2);
    if (t1 > t_near) {
      t_near = t1;
      near_axis = axis;
    }
    t_far = std::min(t_far, t2);
  }
  // Rays starting inside a box see nothing of it.
  if (near_axis < 0 || t_near > t_far || t_near <= kHitEpsilon) return std::nullopt;
  Vec3 n{};
  const double sign = component(d, near_axis) > 0.0 ? -1.0 : 1.0;
  if (near_axis == 0) n.x = sign;
  if (near_axis == 1) n.y = sign;
  if (near_axis == 2) n.z = sign;
  return std::make_pair(t_near, n);
}

}  // namespace

void Material::validate() const {
  for (double c : {color.x, color.y, color.z}) {
    if (!(c >= 0.0 && c <= 1.0)) {
      throw InvalidArgument(fmt::format("material '{}': color outside [0,1]", name));
    }
  }
  if (!(reflectance >= 0.0 && reflectance <= 1.0)) {
    throw InvalidArgument(fmt::format("material '{}': rho {} outside [0,1]", name, reflectance));
  }
}

void Scene::validate() const {
  for (const auto& m : materials) m.validate();
  if (ground && *ground >= materials.size()) {
    throw InvalidArgument("ground material index out of range");
  }
  for (std::size_t k = 0; k < boxes.size(); ++k) {
    const auto& b = boxes[k];
    if (!(b.max.x > b.min.x && b.max.y > b.min.y && b.max.z > b.min.z)) {
      throw InvalidArgument(fmt::format("box {} has non-positive extent", k));
    }
    if (b.material >= materials.size()) {
      throw InvalidArgument(fmt::format("box {} material index out of range", k));
    }
  }
}

std::optional<Hit> raycast(const Scene& scene, const Vec3& origin, const Vec3& direction,
                           double max_range) {
  if (std::abs(direction.norm() - 1.0) > 1e-9) {
    throw InvalidArgument(fmt::format("ray direction is not unit length (|d| = {})",
                                      direction.norm()));
  }
  std::optional<Hit> best;
  auto consider = [&](double t, const Vec3& n, std::size_t material) {
    if (t > max_range) return;
    if (!best || t < best->distance) best = Hit{t, n, material};
  };

  if (scene.ground && direction.z != 0.0) {
    const double t = -origin.z / direction.z;
    if (t > kHitEpsilon) {
      consider(t, Vec3{0.0, 0.0, origin.z >= 0.0 ? 1.0 : -1.0}, *scene.ground);
    }
  }
  for (const auto& box : scene.boxes) {
    if (auto h = intersect_box(box, origin, direction)) consider(h->first, h->second, box.material);
  }
  return best;
}

std::optional<double> lidar_intensity(const Hit& hit, const Material& material,
                                      const Vec3& direction, const IntensityModel& model) {
  if (material.transparent) return std::nullopt;
  double value = material.reflectance * std::max(0.0, -hit.normal.dot(direction));
  if (model.distance_falloff && hit.distance > 1.0) value /= hit.distance * hit.distance;
  return std::clamp(value, 0.0, 1.0);
}

Frame render_frame(const Scene& scene, const SensorConfig& cfg, const CameraModel& cam,
                   const IntensityModel& model) {
  Frame frame{AppearanceImage(static_cast<std::size_t>(cam.height),
                              static_cast<std::size_t>(cam.width)),
              RangeImage(cfg)};

  const Vec3 cam_origin = scene.sensor_origin + cam.extrinsic.origin_in_source();
  for (int y = 0; y < cam.height; ++y) {
    for (int x = 0; x < cam.width; ++x) {
      const Vec3 dir = camera_ray_direction(cam, x, y);
      const auto hit = raycast(scene, cam_origin, dir, cfg.max_range);
      if (!hit) continue;
      const Vec3& c = scene.materials[hit->material].color;
      frame.image.channels[0](y, x) = c.x;
      frame.image.channels[1](y, x) = c.y;
      frame.image.channels[2](y, x) = c.z;
    }
  }

  for (std::size_t i = 0; i < frame.range.rows(); ++i) {
    for (std::size_t j = 0; j < frame.range.cols(); ++j) {
      const Vec3 dir = bin_center_direction(cfg, i, j);
      const auto hit = raycast(scene, scene.sensor_origin, dir, cfg.max_range);
      if (!hit) continue;
      const auto value = lidar_intensity(*hit, scene.materials[hit->material], dir, model);
      if (!value) continue;
      frame.range.depth(i, j) = hit->distance;
      frame.range.intensity(i, j) = *value;
    }
  }
  return frame;
}

RangeImage render_clean_range_image(const Scene& scene, const SensorConfig& cfg) {
  RangeImage ri(cfg);
  for (std::size_t i = 0; i < ri.rows(); ++i) {
    for (std::size_t j = 0; j < ri.cols(); ++j) {
      const auto hit = raycast(scene, scene.sensor_origin, bin_center_direction(cfg, i, j),
                               cfg.max_range);
      if (hit) ri.depth(i, j) = hit->distance;
    }
  }
  return ri;
}

PredictorOutput render_response_field(const Scene& scene, const SensorConfig& cfg,
                                      const CameraModel& cam, const IntensityModel& model) {
  PredictorOutput out(static_cast<std::size_t>(cam.height), static_cast<std::size_t>(cam.width));
  const Vec3 cam_origin = scene.sensor_origin + cam.extrinsic.origin_in_source();
  for (int y = 0; y < cam.height; ++y) {
    for (int x = 0; x < cam.width; ++x) {
      const Vec3 dir = camera_ray_direction(cam, x, y);
      const auto hit = raycast(scene, cam_origin, dir, cfg.max_range);
      if (!hit) continue;
      const auto value = lidar_intensity(*hit, scene.materials[hit->material], dir, model);
      if (!value) continue;
      out.raydrop(y, x) = 1.0;
      out.intensity(y, x) = *value;
    }
  }
  return out;
}

std::vector<Material> default_palette() {
  return {
      {"asphalt", {0.30, 0.30, 0.32}, 0.20, false},
      {"concrete", {0.80, 0.78, 0.72}, 0.55, false},
      {"brick", {0.70, 0.22, 0.15}, 0.35, false},
      {"paint", {0.10, 0.30, 0.85}, 0.85, false},
      {"foliage", {0.20, 0.60, 0.20}, 0.15, false},
      {"glass", {0.60, 0.90, 0.95}, 0.05, true},
  };
}

Scene random_scene(std::uint64_t seed, const SceneBounds& bounds, std::pair<int, int> box_count,
                   const std::vector<Material>& palette) {
  if (palette.empty()) throw InvalidArgument("material palette is empty");
  if (box_count.first < 0 || box_count.second < box_count.first) {
    throw InvalidArgument("invalid box count range");
  }
  std::set<std::tuple<double, double, double>> colors;
  for (const auto& m : palette) {
    m.validate();
    if (!colors.emplace(m.color.x, m.color.y, m.color.z).second) {
      throw InvalidArgument(fmt::format("palette colour of '{}' is not unique", m.name));
    }
  }

  Rng rng(seed);
  Scene scene;
  scene.materials = palette;
  scene.ground = 0;
  const int n = rng.integer(box_count.first, box_count.second);
  for (int k = 0; k < n; ++k) {
    Box b;
    const double x0 = rng.uniform(bounds.x.first, bounds.x.second);
    const double y0 = rng.uniform(bounds.y.first, bounds.y.second);
    const double dx = rng.uniform(bounds.depth.first, bounds.depth.second);
    const double dy = rng.uniform(bounds.width.first, bounds.width.second);
    const double dz = rng.uniform(bounds.height.first, bounds.height.second);
    b.min = {x0, y0 - 0.5 * dy, 0.0};
    b.max = {x0 + dx, y0 + 0.5 * dy, dz};
    b.material = palette.size() > 1 ? 1 + rng.index(palette.size() - 1) : 0;
    scene.boxes.push_back(b);
  }
  scene.validate();
  return scene;
}

}  // namespace lidarsim
