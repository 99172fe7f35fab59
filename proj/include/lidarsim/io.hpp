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
 * \file io.hpp
 * Binary containers (all little-endian):
 *
 *   tensor  "RTNS" u32 version=1, u32 dtype=1 (float32), u32 rank,
 *           rank x u32 dims, row-major float32 payload
 *   weights "RTNW" u32 version=1, u32 count, then count x
 *           (u32 name length, UTF-8 name, tensor record)
 *   cloud   headerless float32 quadruples (x, y, z, intensity)
 *
 * plus PGM dumps and the text formats for scenes and sensor rigs.
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lidarsim/config.hpp"
#include "lidarsim/core.hpp"
#include "lidarsim/model.hpp"
#include "lidarsim/pipeline.hpp"
#include "lidarsim/scene.hpp"

namespace lidarsim {

class FormatError : public std::runtime_error {
 public:
  enum class Kind {
    kTruncated,
    kBadMagic,
    kBadVersion,
    kBadDtype,
    kDimensionOverflow,
    kTrailingBytes,
    kDuplicateName,
    kShapeMismatch,
    kIo,
  };

  FormatError(Kind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct Tensor {
  std::vector<std::uint32_t> dims;
  std::vector<float> data;

  std::size_t element_count() const;
  friend bool operator==(const Tensor&, const Tensor&) = default;
};

using Bytes = std::vector<std::uint8_t>;

Bytes encode_tensor(const Tensor& t);
/// Decodes one tensor record starting at the front of `bytes`; `consumed`
/// receives its length. Without `consumed`, trailing bytes are an error.
Tensor decode_tensor(std::span<const std::uint8_t> bytes, std::size_t* consumed = nullptr);

using NamedTensors = std::vector<std::pair<std::string, Tensor>>;

Bytes encode_weights(const NamedTensors& tensors);
NamedTensors decode_weights(std::span<const std::uint8_t> bytes);

Bytes encode_cloud(const PointCloud& pc);
PointCloud decode_cloud(std::span<const std::uint8_t> bytes);

Bytes read_bytes(const std::filesystem::path& path);
void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

Tensor read_tensor(const std::filesystem::path& path);
void write_tensor(const std::filesystem::path& path, const Tensor& t);
PointCloud read_cloud(const std::filesystem::path& path);
void write_cloud(const std::filesystem::path& path, const PointCloud& pc);

/// Parameters as float32 tensors plus the reserved `cfg.C` / `cfg.N` scalars.
NamedTensors model_to_tensors(const RinetLite& model);
/// Throws FormatError when a tensor is missing or has the wrong shape.
RinetLite model_from_tensors(const NamedTensors& tensors);
void write_weights(const std::filesystem::path& path, const RinetLite& model);
RinetLite read_weights(const std::filesystem::path& path);

// Grid conversions. Layouts: range image [2, rows, cols] (depth, intensity);
// appearance [3, H, W]; dense mask [2, H, W] (value, depth); prediction
// [2, H, W] (raydrop, intensity); single grid [H, W].
Tensor to_tensor(const RangeImage& ri);
Tensor to_tensor(const AppearanceImage& img);
Tensor to_tensor(const DenseIntensityMask& mask);
Tensor to_tensor(const PredictorOutput& pred);
Tensor to_tensor(const GridD& grid);
RangeImage range_image_from_tensor(const Tensor& t);
AppearanceImage appearance_from_tensor(const Tensor& t);
DenseIntensityMask mask_from_tensor(const Tensor& t);
PredictorOutput prediction_from_tensor(const Tensor& t);
/// Channel `channel` of a rank-3 tensor, or the whole of a rank-2 tensor.
GridD grid_from_tensor(const Tensor& t, std::size_t channel = 0);

/// Binary 8-bit PGM (P5), value = round(255 * clamp(x, 0, 1)).
Bytes encode_pgm(const GridD& grid);
void write_pgm(const GridD& grid, const std::filesystem::path& path);

/// Scene text: [scene] ground / sensor_origin, repeated [material]
/// (name, color, rho, transparent) and [box] (min, max, material) sections.
const ConfigSchema& scene_schema();
Scene parse_scene(std::string_view text);
std::string format_scene(const Scene& scene);

struct Rig {
  SensorConfig sensor;
  CameraModel camera;
};

/// Rig text: [sensor] either `preset = waymo64` or explicit rows, cols,
/// elev_min_deg, elev_max_deg, az_min_deg, az_max_deg, max_range; [camera]
/// width, height, fx, fy, optional cx, cy (default image centre) and
/// translation. The camera always looks along sensor +x.
const ConfigSchema& rig_schema();
Rig parse_rig(std::string_view text);
std::string format_rig(const Rig& rig);

/// Desk-scale rig: 32x64 sensor over +-18 deg elevation and +-45 deg azimuth
/// (40 m range), 128x64 camera with 128 px focal length.
Rig desk_rig();

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace lidarsim
