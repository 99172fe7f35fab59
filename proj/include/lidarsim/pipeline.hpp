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
 * \file pipeline.hpp
 * Enhancement of clean raycasted scans: a predicted raydrop gate and
 * intensity field are applied in camera space, then uniform random raydrop
 * emulates sensor noise. Also the mask metrics used for evaluation.
 */
#pragma once

#include <cstdint>

#include "lidarsim/core.hpp"

namespace lidarsim {

struct NoiseModel {
  double p = 0.45;  // per-point drop probability
  std::uint64_t seed = 0;

  void validate() const;
};

enum class FrustumPolicy {
  kKeepZeroIntensity,
  kDrop,
};

struct EnhanceOptions {
  double threshold = 0.5;
  FrustumPolicy out_of_frustum = FrustumPolicy::kKeepZeroIntensity;

  void validate() const;
};

/// Per point: project into the camera. Points that miss the image follow
/// `opts.out_of_frustum`. Otherwise the raydrop channel is read at the
/// nearest pixel; at or below the threshold the point is removed, above it
/// the point keeps its position and takes the bilinear sample of the
/// intensity channel. Survivors keep their order.
PointCloud enhance_pointcloud(const PointCloud& pc, const PredictorOutput& pred,
                              const CameraModel& cam, const EnhanceOptions& opts = {});

/// Drops each point independently with probability noise.p. The decision for
/// point k depends only on (seed, k).
PointCloud apply_random_raydrop(const PointCloud& pc, const NoiseModel& noise);

/// range image -> cloud -> enhance -> random raydrop -> range image.
RangeImage enhance_range_image(const RangeImage& ri, const SensorConfig& cfg,
                               const PredictorOutput& pred, const CameraModel& cam,
                               const NoiseModel& noise, const EnhanceOptions& opts = {});

/// True when the bin centre of cell (row, col) projects inside the image.
bool cell_in_frustum(const SensorConfig& cfg, const CameraModel& cam, std::size_t row,
                     std::size_t col);

/// |a & b| / |a | b|, 1 when both are empty. Nonzero entries count as set.
double mask_iou(const GridD& a, const GridD& b);

/// Binary grid of entries strictly above threshold.
GridD binarize(const GridD& g, double threshold);

/// Mean |pred - M| over pixels with M > 0; 0 when there are none.
double intensity_mae(const GridD& pred, const DenseIntensityMask& truth);

}  // namespace lidarsim
