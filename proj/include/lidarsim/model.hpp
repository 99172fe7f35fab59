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
 * \file model.hpp
 * Raydrop / intensity predictor and its training.
 *
 * RinetLite is a small fully convolutional network:
 *
 *   input conv 3x3 (3 -> C) + ReLU
 *   N residual blocks: conv -> instance norm -> ReLU -> conv -> instance norm,
 *                      added to the block input, then ReLU
 *   output conv 3x3 (C -> 2) + sigmoid
 *
 * All convolutions are stride 1 with zero padding, so the output is pixel
 * aligned with the input image. Channel 0 is the raydrop probability and
 * channel 1 the intensity.
 *
 * Losses (mean reduction, see raydrop_loss / intensity_loss):
 *   L_R = mean |pred_R - 1[M > 0]|
 *   L_I = sqrt(sum_{M > 0} (pred_I - M)^2 / count(M > 0))
 *   L   = L_R + L_I
 */
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lidarsim/core.hpp"

namespace lidarsim {

// ---------------------------------------------------------------------------
// Losses

class LossValue {
 public:
  LossValue() = default;
  LossValue(double raydrop, double intensity);

  double raydrop() const { return raydrop_; }
  double intensity() const { return intensity_; }
  double total() const { return total_; }

 private:
  double raydrop_ = 0.0;
  double intensity_ = 0.0;
  double total_ = 0.0;
};

/// Mean over all pixels of |pred_R - 1[M > 0]|.
double raydrop_loss(const GridD& pred_raydrop, const DenseIntensityMask& target);
/// d raydrop_loss / d pred_R. Uses sign(0) = 0.
GridD raydrop_loss_gradient(const GridD& pred_raydrop, const DenseIntensityMask& target);

/// Root mean square of (pred_I - M) over pixels with M > 0; 0 when there are
/// none.
double intensity_loss(const GridD& pred_intensity, const DenseIntensityMask& target);
/// d intensity_loss / d pred_I; zero wherever M == 0 and everywhere when the
/// loss is 0.
GridD intensity_loss_gradient(const GridD& pred_intensity, const DenseIntensityMask& target);

LossValue total_loss(const PredictorOutput& pred, const DenseIntensityMask& target);

/// 1[pred_R > threshold] * pred_I (strict inequality).
GridD combine_prediction(const PredictorOutput& pred, double threshold = 0.5);

// ---------------------------------------------------------------------------
// Network

struct RinetConfig {
  int channels = 8;
  int blocks = 2;

  friend bool operator==(const RinetConfig&, const RinetConfig&) = default;
};

struct TensorSpec {
  std::string name;
  std::vector<std::size_t> shape;
  std::size_t offset = 0;
  std::size_t size = 0;

  friend bool operator==(const TensorSpec&, const TensorSpec&) = default;
};

/// Parameters live in one flat vector; `layout()` names the slices.
class RinetLite {
 public:
  static constexpr double kNormEpsilon = 1e-5;
  static constexpr std::size_t kMinSide = 8;

  /// All weights and biases zero, instance-norm scales 1, shifts 0.
  explicit RinetLite(RinetConfig cfg = {});

  /// Weights and biases uniform in [-k, k] with k = 1/sqrt(fan_in).
  static RinetLite initialized(RinetConfig cfg, std::uint64_t seed);

  const RinetConfig& config() const { return cfg_; }
  const std::vector<TensorSpec>& layout() const { return layout_; }
  const TensorSpec& tensor(const std::string& name) const;

  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }
  std::span<double> parameters(const std::string& name);
  std::span<const double> parameters(const std::string& name) const;

  friend bool operator==(const RinetLite&, const RinetLite&) = default;

 private:
  RinetConfig cfg_;
  std::vector<TensorSpec> layout_;
  std::vector<double> params_;
};

/// Forward pass. Throws InvalidArgument for images smaller than 8x8.
PredictorOutput predict(const RinetLite& model, const AppearanceImage& image);

struct Sample {
  AppearanceImage image;
  DenseIntensityMask mask;
};

enum class LossTerms { kBoth, kRaydrop, kIntensity };

struct LossAndGradient {
  LossValue loss;
  std::vector<double> gradient;  // same layout as RinetLite::parameters()
};

/// Loss on one sample and its gradient with respect to every parameter.
LossAndGradient loss_and_gradient(const RinetLite& model, const Sample& sample,
                                  LossTerms terms = LossTerms::kBoth);

/// Scalar objective selected by `terms`.
double sample_loss(const RinetLite& model, const Sample& sample,
                   LossTerms terms = LossTerms::kBoth);

/// Normalises each channel of a C x H x W map (flat, channel-major) to zero
/// mean and unit variance over its H*W values, with `eps` in the variance.
std::vector<double> instance_normalize(std::span<const double> features, std::size_t channels,
                                       double eps = RinetLite::kNormEpsilon);

// ---------------------------------------------------------------------------
// Optimisation

struct TrainConfig {
  int epochs = 30;
  double base_lr = 2e-2;
  int decay_epochs = 10;  // linear decay to 0 over the last decay_epochs
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int batch_size = 4;
  std::uint64_t seed = 0;

  void validate() const;
};

/// base_lr before the decay window, then base_lr * (epochs - epoch) / window.
/// Throws std::out_of_range unless 0 <= epoch < epochs.
double learning_rate(const TrainConfig& cfg, int epoch);

class Adam {
 public:
  Adam(std::size_t size, double beta1 = 0.9, double beta2 = 0.999, double epsilon = 1e-8);

  void step(std::span<double> params, std::span<const double> grads, double lr);
  std::size_t steps() const { return t_; }

 private:
  double beta1_;
  double beta2_;
  double epsilon_;
  std::size_t t_ = 0;
  std::vector<double> m_;
  std::vector<double> v_;
};

struct EpochStats {
  int epoch = 0;
  double learning_rate = 0.0;
  double loss = 0.0;  // mean total loss over the epoch's samples
  double raydrop_loss = 0.0;
  double intensity_loss = 0.0;
};

struct TrainResult {
  RinetLite model;
  std::vector<EpochStats> trace;
};

class TrainingError : public std::runtime_error {
 public:
  TrainingError(const std::string& what, std::size_t step)
      : std::runtime_error(what), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

/// Adam on the mean per-sample total loss over mini-batches. The sample
/// order is reshuffled every epoch from cfg.seed; runs are bit-reproducible.
/// Throws InvalidArgument for an empty or non-uniform dataset and
/// TrainingError on a non-finite loss.
TrainResult train(RinetLite model, const std::vector<Sample>& dataset, const TrainConfig& cfg,
                  const std::function<void(const EpochStats&)>& on_epoch = {});

/// Max relative error |g_a - g_fd| / max(1e-8, |g_a| + |g_fd|) between the
/// analytic gradient and central differences (step 1e-4) over `probes`
/// parameters picked with `seed`. Probes whose stencil crosses a kink of the
/// L1 term or flips any ReLU are resampled.
double gradient_check(const RinetLite& model, const Sample& sample, std::size_t probes,
                      std::uint64_t seed = 0, LossTerms terms = LossTerms::kBoth);

}  // namespace lidarsim
