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

#include "lidarsim/core.hpp"

#include <fmt/format.h>

#include <algorithm>

namespace lidarsim {

namespace {

bool finite(double v) { return std::isfinite(v); }

bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

}  // namespace

SensorConfig::SensorConfig(std::string name, int rows, int cols, double elev_min,
                           double elev_max, double az_min, double az_max, double max_range)
    : name(std::move(name)),
      rows(rows),
      cols(cols),
      elev_min(elev_min),
      elev_max(elev_max),
      az_min(az_min),
      az_max(az_max),
      max_range(max_range) {
  validate();
}

void SensorConfig::validate() const {
  if (rows < 1 || cols < 1) {
    throw InvalidArgument(fmt::format("sensor '{}': rows and cols must be >= 1 (got {}x{})", name,
                                      rows, cols));
  }
  if (!finite(elev_min) || !finite(elev_max) || !(elev_min < elev_max)) {
    throw InvalidArgument(fmt::format("sensor '{}': need elev_min < elev_max", name));
  }
  if (elev_min < -kPi / 2 || elev_max > kPi / 2) {
    throw InvalidArgument(fmt::format("sensor '{}': elevation outside [-pi/2, pi/2]", name));
  }
  if (!finite(az_min) || !finite(az_max) || !(az_min < az_max) ||
      az_max > az_min + 2.0 * kPi + 1e-12) {
    throw InvalidArgument(
        fmt::format("sensor '{}': need az_min < az_max <= az_min + 2*pi", name));
  }
  if (!finite(max_range) || !(max_range > 0.0)) {
    throw InvalidArgument(fmt::format("sensor '{}': max_range must be > 0", name));
  }
}

bool wraps(const SensorConfig& cfg) {
  return std::abs((cfg.az_max - cfg.az_min) - 2.0 * kPi) <= 1e-12;
}

const std::vector<std::string>& sensor_preset_names() {
  static const std::vector<std::string> names{"waymo64", "kitti64"};
  return names;
}

SensorConfig sensor_preset(std::string_view name) {
  // channels, vertical FoV (deg), max range (m)
  if (name == "waymo64") {
    return SensorConfig("waymo64", 64, 2048, deg2rad(-25.0), deg2rad(25.0), -kPi, kPi, 75.0);
  }
  if (name == "kitti64") {
    return SensorConfig("kitti64", 64, 2048, deg2rad(-13.5), deg2rad(13.5), -kPi, kPi, 80.0);
  }
  std::string valid;
  for (const auto& n : sensor_preset_names()) {
    valid += (valid.empty() ? "" : ", ") + n;
  }
  throw InvalidArgument(fmt::format("unknown sensor preset '{}' (valid: {})", name, valid));
}

std::size_t RangeImage::count_returns() const {
  return static_cast<std::size_t>(
      std::count_if(depth.data().begin(), depth.data().end(), [](double d) { return d > 0.0; }));
}

std::vector<std::string> validate_range_image(const RangeImage& ri, const SensorConfig& cfg) {
  std::vector<std::string> report;
  if (ri.rows() != static_cast<std::size_t>(cfg.rows) ||
      ri.cols() != static_cast<std::size_t>(cfg.cols)) {
    report.push_back(fmt::format("dimensions {}x{} do not match sensor {}x{}", ri.rows(),
                                 ri.cols(), cfg.rows, cfg.cols));
  }
  if (!ri.intensity.same_shape(ri.depth)) {
    report.push_back("depth and intensity grids differ in shape");
    return report;
  }
  for (std::size_t i = 0; i < ri.rows(); ++i) {
    for (std::size_t j = 0; j < ri.cols(); ++j) {
      const double d = ri.depth(i, j);
      const double v = ri.intensity(i, j);
      if (!finite(d) || d < 0.0) {
        report.push_back(fmt::format("invalid depth {} at ({},{})", d, i, j));
      } else if (d > cfg.max_range) {
        report.push_back(fmt::format("depth {} beyond max range at ({},{})", d, i, j));
      }
      if (!finite(v) || !in_unit(v)) {
        report.push_back(fmt::format("intensity {} outside [0,1] at ({},{})", v, i, j));
      }
      if (d == 0.0 && v != 0.0) {
        report.push_back(fmt::format("intensity without return at ({},{})", i, j));
      }
    }
  }
  return report;
}

void validate_pointcloud(const PointCloud& pc) {
  for (std::size_t k = 0; k < pc.points.size(); ++k) {
    const auto& p = pc.points[k];
    if (!finite(p.x) || !finite(p.y) || !finite(p.z)) {
      throw InvalidArgument(fmt::format("point {} has a non-finite coordinate", k));
    }
    if (!finite(p.intensity) || !in_unit(p.intensity)) {
      throw InvalidArgument(fmt::format("point {} intensity {} outside [0,1]", k, p.intensity));
    }
  }
}

Vec3 RigidTransform::rotate(const Vec3& v) const {
  const auto& r = rotation;
  return {r[0][0] * v.x + r[0][1] * v.y + r[0][2] * v.z,
          r[1][0] * v.x + r[1][1] * v.y + r[1][2] * v.z,
          r[2][0] * v.x + r[2][1] * v.y + r[2][2] * v.z};
}

Vec3 RigidTransform::rotate_inverse(const Vec3& v) const {
  const auto& r = rotation;
  return {r[0][0] * v.x + r[1][0] * v.y + r[2][0] * v.z,
          r[0][1] * v.x + r[1][1] * v.y + r[2][1] * v.z,
          r[0][2] * v.x + r[1][2] * v.y + r[2][2] * v.z};
}

Vec3 RigidTransform::apply(const Vec3& p) const { return rotate(p) + translation; }

Vec3 RigidTransform::origin_in_source() const { return -rotate_inverse(translation); }

RigidTransform forward_looking_extrinsic() {
  RigidTransform t;
  t.rotation = {{{0, -1, 0}, {0, 0, -1}, {1, 0, 0}}};
  return t;
}

CameraModel::CameraModel(int width, int height, double fx, double fy, double cx, double cy,
                         RigidTransform extrinsic)
    : width(width), height(height), fx(fx), fy(fy), cx(cx), cy(cy), extrinsic(extrinsic) {
  validate();
}

CameraModel CameraModel::centered(int width, int height, double focal,
                                  RigidTransform extrinsic) {
  return CameraModel(width, height, focal, focal, 0.5 * (width - 1), 0.5 * (height - 1),
                     extrinsic);
}

void CameraModel::validate() const {
  if (width < 1 || height < 1) {
    throw InvalidArgument(fmt::format("camera size must be positive (got {}x{})", width, height));
  }
  if (!finite(fx) || !finite(fy) || !(fx > 0.0) || !(fy > 0.0)) {
    throw InvalidArgument("camera focal lengths must be > 0");
  }
  if (!finite(cx) || !finite(cy)) {
    throw InvalidArgument("camera principal point must be finite");
  }
  const auto& r = extrinsic.rotation;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double dot = 0.0;
      for (int k = 0; k < 3; ++k) dot += r[i][k] * r[j][k];
      if (std::abs(dot - (i == j ? 1.0 : 0.0)) > 1e-9) {
        throw InvalidArgument("camera extrinsic rotation is not orthonormal");
      }
    }
  }
  const double det = r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1]) -
                     r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0]) +
                     r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0]);
  if (std::abs(det - 1.0) > 1e-9) {
    throw InvalidArgument("camera extrinsic rotation must have determinant 1");
  }
  const auto& t = extrinsic.translation;
  if (!finite(t.x) || !finite(t.y) || !finite(t.z)) {
    throw InvalidArgument("camera extrinsic translation must be finite");
  }
}

void validate_appearance(const AppearanceImage& img, const CameraModel& cam) {
  for (const auto& ch : img.channels) {
    if (ch.rows() != static_cast<std::size_t>(cam.height) ||
        ch.cols() != static_cast<std::size_t>(cam.width)) {
      throw InvalidArgument(fmt::format("appearance image {}x{} does not match camera {}x{}",
                                        ch.cols(), ch.rows(), cam.width, cam.height));
    }
    for (double v : ch.data()) {
      if (!finite(v) || !in_unit(v)) throw InvalidArgument("appearance value outside [0,1]");
    }
  }
}

PredictorOutput::PredictorOutput(GridD raydrop_in, GridD intensity_in)
    : raydrop(std::move(raydrop_in)), intensity(std::move(intensity_in)) {
  if (!raydrop.same_shape(intensity)) {
    throw InvalidArgument("prediction channels differ in shape");
  }
  for (const GridD* g : {&raydrop, &intensity}) {
    for (double v : g->data()) {
      if (!finite(v) || !in_unit(v)) throw InvalidArgument("prediction value outside [0,1]");
    }
  }
}

PredictorOutput prediction_from_mask(const DenseIntensityMask& mask) {
  PredictorOutput out(mask.height(), mask.width());
  for (std::size_t k = 0; k < mask.value.size(); ++k) {
    const double m = mask.value.data()[k];
    out.raydrop.data()[k] = m > 0.0 ? 1.0 : 0.0;
    out.intensity.data()[k] = m;
  }
  return out;
}

}  // namespace lidarsim
