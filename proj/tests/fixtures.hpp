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

// Deterministic inputs shared by the unit and acceptance tests.
#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "lidarsim/core.hpp"
#include "lidarsim/model.hpp"
#include "lidarsim/rng.hpp"

namespace lidarsim::fixture {

// Smooth colour ramps with a bright square, values in [0,1].
inline AppearanceImage pattern_image(std::size_t h, std::size_t w) {
  AppearanceImage img(h, w);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const double fx = static_cast<double>(x) / static_cast<double>(w - 1);
      const double fy = static_cast<double>(y) / static_cast<double>(h - 1);
      const bool square = x >= w / 4 && x < w / 2 && y >= h / 4 && y < h / 2;
      img.channels[0](y, x) = square ? 0.9 : fx;
      img.channels[1](y, x) = square ? 0.9 : fy;
      img.channels[2](y, x) = square ? 0.1 : 0.5 * (fx + fy);
    }
  }
  return img;
}

// Mask valid on the lower-left triangle with a left-to-right ramp.
inline DenseIntensityMask pattern_mask(std::size_t h, std::size_t w) {
  DenseIntensityMask m(h, w);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      if (x > y) continue;
      m.value(y, x) = 0.1 + 0.8 * static_cast<double>(x) / static_cast<double>(w - 1);
      m.depth(y, x) = 10.0;
    }
  }
  return m;
}

// L1 fit of one scalar against i.i.d. targets that are 0 with probability
// q and 1 otherwise, using the raydrop loss and Adam under the default
// schedule. Returns the final estimate.
inline double median_recovery(double q, std::uint64_t seed, int epochs = 30,
                              int steps_per_epoch = 25) {
  Rng rng(seed);
  constexpr std::size_t kTargets = 1000;
  DenseIntensityMask target(1, kTargets);
  for (std::size_t k = 0; k < kTargets; ++k) target.value(0, k) = rng.uniform() < q ? 0.0 : 1.0;

  TrainConfig cfg;
  cfg.epochs = epochs;
  Adam adam(1);
  std::vector<double> theta{0.5};
  for (int epoch = 0; epoch < epochs; ++epoch) {
    const double lr = learning_rate(cfg, epoch);
    for (int s = 0; s < steps_per_epoch; ++s) {
      const GridD pred(1, kTargets, theta[0]);
      const GridD g = raydrop_loss_gradient(pred, target);
      double grad = 0.0;
      for (double v : g.data()) grad += v;
      const std::vector<double> grads{grad};
      adam.step(theta, grads, lr);
    }
  }
  return theta[0];
}

}  // namespace lidarsim::fixture
