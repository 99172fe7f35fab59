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

#include "lidarsim/pipeline.hpp"

#include <fmt/format.h>

#include <cmath>

#include "lidarsim/geometry.hpp"
#include "lidarsim/rng.hpp"

namespace lidarsim {

namespace {

bool inside_image(const PixelCoord& px, const CameraModel& cam) {
  return px.u >= 0.0 && px.u <= cam.width - 1 && px.v >= 0.0 && px.v <= cam.height - 1;
}

}  // namespace

void NoiseModel::validate() const {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw InvalidArgument(fmt::format("noise probability {} outside [0,1]", p));
  }
}

void EnhanceOptions::validate() const {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw InvalidArgument(fmt::format("threshold {} outside [0,1]", threshold));
  }
}

PointCloud enhance_pointcloud(const PointCloud& pc, const PredictorOutput& pred,
                              const CameraModel& cam, const EnhanceOptions& opts) {
  opts.validate();
  if (pred.height() != static_cast<std::size_t>(cam.height) ||
      pred.width() != static_cast<std::size_t>(cam.width) ||
      !pred.intensity.same_shape(pred.raydrop)) {
    throw InvalidArgument(fmt::format("prediction {}x{} does not match camera {}x{}",
                                      pred.width(), pred.height(), cam.width, cam.height));
  }

  PointCloud out;
  out.points.reserve(pc.size());
  for (const auto& p : pc.points) {
    const auto px = project_to_camera(p.position(), cam);
    if (!px || !inside_image(*px, cam)) {
      if (opts.out_of_frustum == FrustumPolicy::kKeepZeroIntensity) {
        out.points.push_back({p.x, p.y, p.z, 0.0});
      }
      continue;
    }
    const auto col = static_cast<std::size_t>(std::lround(px->u));
    const auto row = static_cast<std::size_t>(std::lround(px->v));
    if (pred.raydrop(row, col) <= opts.threshold) continue;
    out.points.push_back({p.x, p.y, p.z, sample_bilinear(pred.intensity, px->u, px->v)});
  }
  return out;
}

PointCloud apply_random_raydrop(const PointCloud& pc, const NoiseModel& noise) {
  noise.validate();
  PointCloud out;
  out.points.reserve(pc.size());
  for (std::size_t k = 0; k < pc.size(); ++k) {
    if (counter_uniform(noise.seed, k) < noise.p) continue;
    out.points.push_back(pc.points[k]);
  }
  return out;
}

RangeImage enhance_range_image(const RangeImage& ri, const SensorConfig& cfg,
                               const PredictorOutput& pred, const CameraModel& cam,
                               const NoiseModel& noise, const EnhanceOptions& opts) {
  const PointCloud clean = range_image_to_pointcloud(ri, cfg);
  const PointCloud enhanced = enhance_pointcloud(clean, pred, cam, opts);
  return pointcloud_to_range_image(apply_random_raydrop(enhanced, noise), cfg);
}

bool cell_in_frustum(const SensorConfig& cfg, const CameraModel& cam, std::size_t row,
                     std::size_t col) {
  const auto px = project_to_camera(bin_center_direction(cfg, row, col), cam);
  return px && inside_image(*px, cam);
}

double mask_iou(const GridD& a, const GridD& b) {
  if (!a.same_shape(b)) {
    throw InvalidArgument(fmt::format("mask_iou: shapes {}x{} and {}x{} differ", a.rows(),
                                      a.cols(), b.rows(), b.cols()));
  }
  std::size_t inter = 0;
  std::size_t uni = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const bool x = a.data()[k] != 0.0;
    const bool y = b.data()[k] != 0.0;
    inter += (x && y) ? 1 : 0;
    uni += (x || y) ? 1 : 0;
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

GridD binarize(const GridD& g, double threshold) {
  GridD out(g.rows(), g.cols());
  for (std::size_t k = 0; k < g.size(); ++k) out.data()[k] = g.data()[k] > threshold ? 1.0 : 0.0;
  return out;
}

double intensity_mae(const GridD& pred, const DenseIntensityMask& truth) {
  if (!pred.same_shape(truth.value)) {
    throw InvalidArgument(fmt::format("intensity_mae: shapes {}x{} and {}x{} differ", pred.rows(),
                                      pred.cols(), truth.height(), truth.width()));
  }
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t k = 0; k < pred.size(); ++k) {
    const double m = truth.value.data()[k];
    if (m > 0.0) {
      sum += std::abs(pred.data()[k] - m);
      ++count;
    }
  }
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

}  // namespace lidarsim
