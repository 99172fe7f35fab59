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
 * \file core.hpp
 * Shared value types: sensor configuration, range images, point clouds,
 * camera model and the camera-aligned masks.
 */
#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lidarsim {

inline constexpr double kPi = 3.14159265358979323846;

constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Row-major 2D grid. Row index first (height), column second (width).
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  T& at(std::size_t r, std::size_t c) {
    check(r, c);
    return (*this)(r, c);
  }
  const T& at(std::size_t r, std::size_t c) const {
    check(r, c);
    return (*this)(r, c);
  }

  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  bool same_shape(const Grid& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  void check(std::size_t r, std::size_t c) const {
    if (r >= rows_ || c >= cols_) {
      throw std::out_of_range("grid index (" + std::to_string(r) + "," + std::to_string(c) +
                              ") outside " + std::to_string(rows_) + "x" +
                              std::to_string(cols_));
    }
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using GridD = Grid<double>;

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator-() const { return {-x, -y, -z}; }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(dot(*this)); }
  Vec3 normalized() const { return *this * (1.0 / norm()); }

  friend bool operator==(const Vec3&, const Vec3&) = default;
};

/// Thrown when a value type is constructed from out-of-range fields.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// LiDAR scan geometry. Row 0 is the top row (elev_max).
struct SensorConfig {
  std::string name;
  int rows = 1;
  int cols = 1;
  double elev_min = 0.0;  // radians
  double elev_max = 0.0;
  double az_min = 0.0;
  double az_max = 0.0;
  double max_range = 0.0;  // meters

  SensorConfig() = default;
  SensorConfig(std::string name, int rows, int cols, double elev_min, double elev_max,
               double az_min, double az_max, double max_range);

  double elev_step() const { return (elev_max - elev_min) / rows; }
  double az_step() const { return (az_max - az_min) / cols; }
  double vfov() const { return elev_max - elev_min; }

  /// Throws InvalidArgument describing the first broken field.
  void validate() const;

  friend bool operator==(const SensorConfig&, const SensorConfig&) = default;
};

/// True when the azimuth span covers the full circle, so column cols-1 and
/// column 0 are neighbours.
bool wraps(const SensorConfig& cfg);

/// Presets built from the published sensor characteristics (channels,
/// vertical field of view, max range). Elevation is centred on the horizon
/// and azimuth covers the full circle with 2048 bins.
SensorConfig sensor_preset(std::string_view name);

/// Names accepted by sensor_preset.
const std::vector<std::string>& sensor_preset_names();

/// Polar grid of (depth, intensity). depth == 0 means no return.
struct RangeImage {
  GridD depth;
  GridD intensity;

  RangeImage() = default;
  RangeImage(std::size_t rows, std::size_t cols) : depth(rows, cols), intensity(rows, cols) {}
  explicit RangeImage(const SensorConfig& cfg)
      : RangeImage(static_cast<std::size_t>(cfg.rows), static_cast<std::size_t>(cfg.cols)) {}

  std::size_t rows() const { return depth.rows(); }
  std::size_t cols() const { return depth.cols(); }
  bool has_return(std::size_t r, std::size_t c) const { return depth(r, c) > 0.0; }
  std::size_t count_returns() const;

  friend bool operator==(const RangeImage&, const RangeImage&) = default;
};

/// Human-readable invariant violations; empty means valid. Never throws.
std::vector<std::string> validate_range_image(const RangeImage& ri, const SensorConfig& cfg);

struct Point {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double intensity = 0.0;

  Vec3 position() const { return {x, y, z}; }
  friend bool operator==(const Point&, const Point&) = default;
};

struct PointCloud {
  std::vector<Point> points;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  friend bool operator==(const PointCloud&, const PointCloud&) = default;
};

/// Throws InvalidArgument on a non-finite coordinate or intensity outside [0,1].
void validate_pointcloud(const PointCloud& pc);

using Mat3 = std::array<std::array<double, 3>, 3>;

/// p_camera = rotation * p_sensor + translation.
struct RigidTransform {
  Mat3 rotation{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
  Vec3 translation{};

  Vec3 apply(const Vec3& p) const;
  Vec3 rotate(const Vec3& v) const;
  /// R^T v.
  Vec3 rotate_inverse(const Vec3& v) const;
  /// Camera centre expressed in the source frame, -R^T t.
  Vec3 origin_in_source() const;

  friend bool operator==(const RigidTransform&, const RigidTransform&) = default;
};

/// Axis permutation that points the optical axis (camera +z) along sensor +x,
/// camera +x along sensor -y and camera +y (image down) along sensor -z.
RigidTransform forward_looking_extrinsic();

/// Pinhole camera. Pixel centres sit at integer coordinates.
struct CameraModel {
  int width = 512;
  int height = 256;
  double fx = 256.0;
  double fy = 256.0;
  double cx = 255.5;
  double cy = 127.5;
  RigidTransform extrinsic = forward_looking_extrinsic();

  CameraModel() = default;
  CameraModel(int width, int height, double fx, double fy, double cx, double cy,
              RigidTransform extrinsic);

  /// width x height camera with fx = fy = focal and the principal point at
  /// the image centre.
  static CameraModel centered(int width, int height, double focal,
                              RigidTransform extrinsic = forward_looking_extrinsic());

  void validate() const;

  friend bool operator==(const CameraModel&, const CameraModel&) = default;
};

/// height x width x 3 RGB image in [0,1], channel-major planes.
struct AppearanceImage {
  std::array<GridD, 3> channels;

  AppearanceImage() = default;
  AppearanceImage(std::size_t height, std::size_t width)
      : channels{GridD(height, width), GridD(height, width), GridD(height, width)} {}

  std::size_t height() const { return channels[0].rows(); }
  std::size_t width() const { return channels[0].cols(); }

  friend bool operator==(const AppearanceImage&, const AppearanceImage&) = default;
};

void validate_appearance(const AppearanceImage& img, const CameraModel& cam);

/// Camera-aligned dense intensity mask M plus its depth buffer (0 = uncovered).
struct DenseIntensityMask {
  GridD value;
  GridD depth;

  DenseIntensityMask() = default;
  DenseIntensityMask(std::size_t height, std::size_t width)
      : value(height, width), depth(height, width) {}

  std::size_t height() const { return value.rows(); }
  std::size_t width() const { return value.cols(); }
  bool valid(std::size_t r, std::size_t c) const { return value(r, c) > 0.0; }

  friend bool operator==(const DenseIntensityMask&, const DenseIntensityMask&) = default;
};

/// Two camera-aligned channels: raydrop probability and intensity.
struct PredictorOutput {
  GridD raydrop;
  GridD intensity;

  PredictorOutput() = default;
  PredictorOutput(std::size_t height, std::size_t width)
      : raydrop(height, width), intensity(height, width) {}
  /// Throws InvalidArgument on a shape mismatch or a value outside [0,1].
  PredictorOutput(GridD raydrop, GridD intensity);

  std::size_t height() const { return raydrop.rows(); }
  std::size_t width() const { return raydrop.cols(); }

  friend bool operator==(const PredictorOutput&, const PredictorOutput&) = default;
};

/// Ideal prediction for a known mask: raydrop = 1[M > 0], intensity = M.
PredictorOutput prediction_from_mask(const DenseIntensityMask& mask);

}  // namespace lidarsim
