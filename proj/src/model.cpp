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

#include "lidarsim/model.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lidarsim/rng.hpp"

namespace lidarsim {

namespace {

void require_same_shape(const GridD& a, const GridD& b, const char* what) {
  if (!a.same_shape(b)) {
    throw InvalidArgument(fmt::format("{}: shape {}x{} does not match target {}x{}", what,
                                      a.rows(), a.cols(), b.rows(), b.cols()));
  }
}

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

}  // namespace

// ---------------------------------------------------------------------------
// Losses

LossValue::LossValue(double raydrop, double intensity)
    : raydrop_(raydrop), intensity_(intensity), total_(raydrop + intensity) {
  if (raydrop < 0.0 || intensity < 0.0) {
    throw InvalidArgument("loss terms must be nonnegative");
  }
}

double raydrop_loss(const GridD& pred, const DenseIntensityMask& target) {
  require_same_shape(pred, target.value, "raydrop_loss");
  if (pred.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t k = 0; k < pred.size(); ++k) {
    const double label = target.value.data()[k] > 0.0 ? 1.0 : 0.0;
    sum += std::abs(pred.data()[k] - label);
  }
  return sum / static_cast<double>(pred.size());
}

GridD raydrop_loss_gradient(const GridD& pred, const DenseIntensityMask& target) {
  require_same_shape(pred, target.value, "raydrop_loss_gradient");
  GridD grad(pred.rows(), pred.cols());
  const double scale = pred.empty() ? 0.0 : 1.0 / static_cast<double>(pred.size());
  for (std::size_t k = 0; k < pred.size(); ++k) {
    const double label = target.value.data()[k] > 0.0 ? 1.0 : 0.0;
    grad.data()[k] = sign(pred.data()[k] - label) * scale;
  }
  return grad;
}

double intensity_loss(const GridD& pred, const DenseIntensityMask& target) {
  require_same_shape(pred, target.value, "intensity_loss");
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t k = 0; k < pred.size(); ++k) {
    const double m = target.value.data()[k];
    if (m > 0.0) {
      const double r = pred.data()[k] - m;
      sum += r * r;
      ++count;
    }
  }
  return count == 0 ? 0.0 : std::sqrt(sum / static_cast<double>(count));
}

GridD intensity_loss_gradient(const GridD& pred, const DenseIntensityMask& target) {
  require_same_shape(pred, target.value, "intensity_loss_gradient");
  GridD grad(pred.rows(), pred.cols());
  const double loss = intensity_loss(pred, target);
  if (loss == 0.0) return grad;
  std::size_t count = 0;
  for (double m : target.value.data()) count += m > 0.0 ? 1 : 0;
  const double scale = 1.0 / (static_cast<double>(count) * loss);
  for (std::size_t k = 0; k < pred.size(); ++k) {
    const double m = target.value.data()[k];
    if (m > 0.0) grad.data()[k] = (pred.data()[k] - m) * scale;
  }
  return grad;
}

LossValue total_loss(const PredictorOutput& pred, const DenseIntensityMask& target) {
  return LossValue(raydrop_loss(pred.raydrop, target), intensity_loss(pred.intensity, target));
}

GridD combine_prediction(const PredictorOutput& pred, double threshold) {
  require_same_shape(pred.intensity, pred.raydrop, "combine_prediction");
  GridD out(pred.height(), pred.width());
  for (std::size_t k = 0; k < out.size(); ++k) {
    out.data()[k] = pred.raydrop.data()[k] > threshold ? pred.intensity.data()[k] : 0.0;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Network layout

RinetLite::RinetLite(RinetConfig cfg) : cfg_(cfg) {
  if (cfg.channels < 1 || cfg.blocks < 0) {
    throw InvalidArgument(
        fmt::format("invalid network size C={} N={}", cfg.channels, cfg.blocks));
  }
  const auto c = static_cast<std::size_t>(cfg.channels);
  std::size_t offset = 0;
  auto add = [&](std::string name, std::vector<std::size_t> shape) {
    const std::size_t size =
        std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
    layout_.push_back({std::move(name), std::move(shape), offset, size});
    offset += size;
  };
  add("input.weight", {c, 3, 3, 3});
  add("input.bias", {c});
  for (int b = 0; b < cfg.blocks; ++b) {
    const std::string p = fmt::format("block{}.", b);
    add(p + "conv1.weight", {c, c, 3, 3});
    add(p + "conv1.bias", {c});
    add(p + "norm1.gamma", {c});
    add(p + "norm1.beta", {c});
    add(p + "conv2.weight", {c, c, 3, 3});
    add(p + "conv2.bias", {c});
    add(p + "norm2.gamma", {c});
    add(p + "norm2.beta", {c});
  }
  add("output.weight", {2, c, 3, 3});
  add("output.bias", {2});

  params_.assign(offset, 0.0);
  for (const auto& spec : layout_) {
    if (spec.name.ends_with(".gamma")) {
      std::fill_n(params_.begin() + static_cast<std::ptrdiff_t>(spec.offset), spec.size, 1.0);
    }
  }
}

RinetLite RinetLite::initialized(RinetConfig cfg, std::uint64_t seed) {
  RinetLite model(cfg);
  Rng rng(seed);
  for (const auto& spec : model.layout_) {
    if (spec.name.ends_with(".gamma") || spec.name.ends_with(".beta")) continue;
    // Biases share the fan-in of their convolution.
    const std::string conv = spec.name.substr(0, spec.name.rfind('.'));
    const auto& w = model.tensor(conv + ".weight");
    const double fan_in = static_cast<double>(w.shape[1] * w.shape[2] * w.shape[3]);
    const double k = 1.0 / std::sqrt(fan_in);
    for (std::size_t i = 0; i < spec.size; ++i) {
      model.params_[spec.offset + i] = rng.uniform(-k, k);
    }
  }
  return model;
}

const TensorSpec& RinetLite::tensor(const std::string& name) const {
  for (const auto& spec : layout_) {
    if (spec.name == name) return spec;
  }
  throw std::out_of_range("no parameter tensor named '" + name + "'");
}

std::span<double> RinetLite::parameters(const std::string& name) {
  const auto& spec = tensor(name);
  return std::span<double>(params_).subspan(spec.offset, spec.size);
}

std::span<const double> RinetLite::parameters(const std::string& name) const {
  const auto& spec = tensor(name);
  return std::span<const double>(params_).subspan(spec.offset, spec.size);
}

// ---------------------------------------------------------------------------
// Layers

namespace {

struct Maps {
  std::size_t c = 0;
  std::size_t h = 0;
  std::size_t w = 0;
  std::vector<double> v;

  Maps() = default;
  Maps(std::size_t c, std::size_t h, std::size_t w) : c(c), h(h), w(w), v(c * h * w, 0.0) {}

  std::size_t plane_size() const { return h * w; }
  double* plane(std::size_t k) { return v.data() + k * h * w; }
  const double* plane(std::size_t k) const { return v.data() + k * h * w; }
};

// Weights are [out][in][3][3].
Maps conv_forward(const Maps& in, const double* weight, const double* bias, std::size_t out_c) {
  const std::size_t h = in.h;
  const std::size_t w = in.w;
  Maps out(out_c, h, w);
  for (std::size_t o = 0; o < out_c; ++o) {
    double* dst = out.plane(o);
    std::fill_n(dst, h * w, bias[o]);
    for (std::size_t i = 0; i < in.c; ++i) {
      const double* src = in.plane(i);
      const double* kern = weight + (o * in.c + i) * 9;
      for (int ky = 0; ky < 3; ++ky) {
        const int dy = ky - 1;
        const std::size_t y_begin = dy < 0 ? 1 : 0;
        const std::size_t y_end = dy > 0 ? h - 1 : h;
        for (int kx = 0; kx < 3; ++kx) {
          const int dx = kx - 1;
          const double k = kern[ky * 3 + kx];
          const std::size_t x_begin = dx < 0 ? 1 : 0;
          const std::size_t x_end = dx > 0 ? w - 1 : w;
          for (std::size_t y = y_begin; y < y_end; ++y) {
            double* drow = dst + y * w;
            const double* srow = src + (y + dy) * w + dx;
            for (std::size_t x = x_begin; x < x_end; ++x) drow[x] += k * srow[x];
          }
        }
      }
    }
  }
  return out;
}

// Accumulates weight/bias gradients; returns d(input) when requested.
void conv_backward(const Maps& in, const double* weight, std::size_t out_c, const Maps& dout,
                   double* dweight, double* dbias, Maps* din) {
  const std::size_t h = in.h;
  const std::size_t w = in.w;
  if (din) *din = Maps(in.c, h, w);
  for (std::size_t o = 0; o < out_c; ++o) {
    const double* g = dout.plane(o);
    double bsum = 0.0;
    for (std::size_t p = 0; p < h * w; ++p) bsum += g[p];
    dbias[o] += bsum;
    for (std::size_t i = 0; i < in.c; ++i) {
      const double* src = in.plane(i);
      const double* kern = weight + (o * in.c + i) * 9;
      double* dkern = dweight + (o * in.c + i) * 9;
      double* dsrc = din ? din->plane(i) : nullptr;
      for (int ky = 0; ky < 3; ++ky) {
        const int dy = ky - 1;
        const std::size_t y_begin = dy < 0 ? 1 : 0;
        const std::size_t y_end = dy > 0 ? h - 1 : h;
        for (int kx = 0; kx < 3; ++kx) {
          const int dx = kx - 1;
          const double k = kern[ky * 3 + kx];
          const std::size_t x_begin = dx < 0 ? 1 : 0;
          const std::size_t x_end = dx > 0 ? w - 1 : w;
          double acc = 0.0;
          for (std::size_t y = y_begin; y < y_end; ++y) {
            const double* grow = g + y * w;
            const double* srow = src + (y + dy) * w + dx;
            for (std::size_t x = x_begin; x < x_end; ++x) acc += grow[x] * srow[x];
            if (dsrc) {
              double* drow = dsrc + (y + dy) * w + dx;
              for (std::size_t x = x_begin; x < x_end; ++x) drow[x] += k * grow[x];
            }
          }
          dkern[ky * 3 + kx] += acc;
        }
      }
    }
  }
}

struct NormCache {
  Maps xhat;
  std::vector<double> inv_std;
};

NormCache norm_forward(const Maps& in, double eps) {
  NormCache cache{Maps(in.c, in.h, in.w), std::vector<double>(in.c)};
  const std::size_t n = in.plane_size();
  for (std::size_t k = 0; k < in.c; ++k) {
    const double* x = in.plane(k);
    double mean = 0.0;
    for (std::size_t p = 0; p < n; ++p) mean += x[p];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t p = 0; p < n; ++p) var += (x[p] - mean) * (x[p] - mean);
    var /= static_cast<double>(n);
    const double inv = 1.0 / std::sqrt(var + eps);
    cache.inv_std[k] = inv;
    double* xh = cache.xhat.plane(k);
    for (std::size_t p = 0; p < n; ++p) xh[p] = (x[p] - mean) * inv;
  }
  return cache;
}

Maps norm_backward(const NormCache& cache, const Maps& dxhat) {
  const Maps& xhat = cache.xhat;
  Maps dx(xhat.c, xhat.h, xhat.w);
  const std::size_t n = xhat.plane_size();
  const double nd = static_cast<double>(n);
  for (std::size_t k = 0; k < xhat.c; ++k) {
    const double* g = dxhat.plane(k);
    const double* xh = xhat.plane(k);
    double sum_g = 0.0;
    double sum_gx = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      sum_g += g[p];
      sum_gx += g[p] * xh[p];
    }
    const double scale = cache.inv_std[k] / nd;
    double* out = dx.plane(k);
    for (std::size_t p = 0; p < n; ++p) out[p] = scale * (nd * g[p] - sum_g - xh[p] * sum_gx);
  }
  return dx;
}

Maps affine_relu(const Maps& xhat, const double* gamma, const double* beta, bool relu) {
  Maps out(xhat.c, xhat.h, xhat.w);
  const std::size_t n = xhat.plane_size();
  for (std::size_t k = 0; k < xhat.c; ++k) {
    const double* x = xhat.plane(k);
    double* y = out.plane(k);
    for (std::size_t p = 0; p < n; ++p) {
      const double a = gamma[k] * x[p] + beta[k];
      y[p] = relu ? std::max(a, 0.0) : a;
    }
  }
  return out;
}

void relu_inplace(Maps& m) {
  for (double& x : m.v) x = std::max(x, 0.0);
}

struct BlockCache {
  NormCache norm1;
  Maps r1;  // ReLU(gamma1 * xhat1 + beta1)
  NormCache norm2;
  Maps out;  // ReLU(x + gamma2 * xhat2 + beta2)
};

struct ForwardCache {
  Maps input;
  Maps x0;
  std::vector<BlockCache> blocks;
  Maps prob;  // sigmoid output, 2 channels
};

struct Params {
  const RinetLite& model;
  const double* at(const std::string& name) const { return model.parameters(name).data(); }
};

Maps image_to_maps(const AppearanceImage& image) {
  Maps m(3, image.height(), image.width());
  for (std::size_t k = 0; k < 3; ++k) {
    std::copy(image.channels[k].data().begin(), image.channels[k].data().end(), m.plane(k));
  }
  return m;
}

void check_image(const RinetLite& model, const AppearanceImage& image) {
  (void)model;
  if (image.height() < RinetLite::kMinSide || image.width() < RinetLite::kMinSide) {
    throw InvalidArgument(fmt::format("image {}x{} is smaller than the minimum {}x{}",
                                      image.width(), image.height(), RinetLite::kMinSide,
                                      RinetLite::kMinSide));
  }
  for (const auto& ch : image.channels) {
    if (!ch.same_shape(image.channels[0])) throw InvalidArgument("image channels differ in shape");
  }
}

ForwardCache forward(const RinetLite& model, const AppearanceImage& image) {
  check_image(model, image);
  const Params p{model};
  const auto c = static_cast<std::size_t>(model.config().channels);
  const double eps = RinetLite::kNormEpsilon;

  ForwardCache cache;
  cache.input = image_to_maps(image);
  cache.x0 = conv_forward(cache.input, p.at("input.weight"), p.at("input.bias"), c);
  relu_inplace(cache.x0);

  const Maps* x = &cache.x0;
  cache.blocks.resize(static_cast<std::size_t>(model.config().blocks));
  for (std::size_t b = 0; b < cache.blocks.size(); ++b) {
    const std::string pre = fmt::format("block{}.", b);
    BlockCache& bc = cache.blocks[b];
    bc.norm1 = norm_forward(conv_forward(*x, p.at(pre + "conv1.weight"), p.at(pre + "conv1.bias"), c),
                            eps);
    bc.r1 = affine_relu(bc.norm1.xhat, p.at(pre + "norm1.gamma"), p.at(pre + "norm1.beta"), true);
    bc.norm2 = norm_forward(
        conv_forward(bc.r1, p.at(pre + "conv2.weight"), p.at(pre + "conv2.bias"), c), eps);
    bc.out = affine_relu(bc.norm2.xhat, p.at(pre + "norm2.gamma"), p.at(pre + "norm2.beta"), false);
    for (std::size_t k = 0; k < bc.out.v.size(); ++k) {
      bc.out.v[k] = std::max(bc.out.v[k] + x->v[k], 0.0);
    }
    x = &bc.out;
  }

  cache.prob = conv_forward(*x, p.at("output.weight"), p.at("output.bias"), 2);
  for (double& v : cache.prob.v) v = 1.0 / (1.0 + std::exp(-v));
  return cache;
}

PredictorOutput to_prediction(const Maps& prob) {
  PredictorOutput out(prob.h, prob.w);
  std::copy(prob.plane(0), prob.plane(0) + prob.plane_size(), out.raydrop.data().begin());
  std::copy(prob.plane(1), prob.plane(1) + prob.plane_size(), out.intensity.data().begin());
  return out;
}

void check_sample(const Sample& sample) {
  if (sample.mask.height() != sample.image.height() ||
      sample.mask.width() != sample.image.width()) {
    throw InvalidArgument(fmt::format("mask {}x{} does not match image {}x{}",
                                      sample.mask.width(), sample.mask.height(),
                                      sample.image.width(), sample.image.height()));
  }
}

LossValue select_loss(const PredictorOutput& pred, const Sample& sample, LossTerms terms) {
  const double lr = terms == LossTerms::kIntensity ? 0.0 : raydrop_loss(pred.raydrop, sample.mask);
  const double li =
      terms == LossTerms::kRaydrop ? 0.0 : intensity_loss(pred.intensity, sample.mask);
  return LossValue(lr, li);
}

}  // namespace

PredictorOutput predict(const RinetLite& model, const AppearanceImage& image) {
  return to_prediction(forward(model, image).prob);
}

std::vector<double> instance_normalize(std::span<const double> features, std::size_t channels,
                                       double eps) {
  if (channels == 0 || features.size() % channels != 0) {
    throw InvalidArgument("feature size is not a multiple of the channel count");
  }
  Maps m(channels, 1, features.size() / channels);
  std::copy(features.begin(), features.end(), m.v.begin());
  return norm_forward(m, eps).xhat.v;
}

LossAndGradient loss_and_gradient(const RinetLite& model, const Sample& sample, LossTerms terms) {
  check_sample(sample);
  const ForwardCache cache = forward(model, sample.image);
  const PredictorOutput pred = to_prediction(cache.prob);

  LossAndGradient result{select_loss(pred, sample, terms),
                         std::vector<double>(model.parameters().size(), 0.0)};
  auto grad = [&](const std::string& name) {
    return result.gradient.data() + model.tensor(name).offset;
  };
  const Params p{model};
  const auto c = static_cast<std::size_t>(model.config().channels);

  // d loss / d logits through the sigmoid.
  Maps dlogit(2, cache.prob.h, cache.prob.w);
  const std::size_t n = cache.prob.plane_size();
  if (terms != LossTerms::kIntensity) {
    const GridD g = raydrop_loss_gradient(pred.raydrop, sample.mask);
    std::copy(g.data().begin(), g.data().end(), dlogit.plane(0));
  }
  if (terms != LossTerms::kRaydrop) {
    const GridD g = intensity_loss_gradient(pred.intensity, sample.mask);
    std::copy(g.data().begin(), g.data().end(), dlogit.plane(1));
  }
  for (std::size_t k = 0; k < 2 * n; ++k) {
    const double s = cache.prob.v[k];
    dlogit.v[k] *= s * (1.0 - s);
  }

  const Maps& last = cache.blocks.empty() ? cache.x0 : cache.blocks.back().out;
  Maps dx;
  conv_backward(last, p.at("output.weight"), 2, dlogit, grad("output.weight"), grad("output.bias"),
                &dx);

  for (std::size_t b = cache.blocks.size(); b-- > 0;) {
    const std::string pre = fmt::format("block{}.", b);
    const BlockCache& bc = cache.blocks[b];
    const Maps& block_in = b == 0 ? cache.x0 : cache.blocks[b - 1].out;

    Maps ds = std::move(dx);
    for (std::size_t k = 0; k < ds.v.size(); ++k) {
      if (bc.out.v[k] <= 0.0) ds.v[k] = 0.0;
    }

    // Second normalisation and its affine.
    const double* gamma2 = p.at(pre + "norm2.gamma");
    double* dgamma2 = grad(pre + "norm2.gamma");
    double* dbeta2 = grad(pre + "norm2.beta");
    Maps dxhat2(c, ds.h, ds.w);
    for (std::size_t k = 0; k < c; ++k) {
      const double* g = ds.plane(k);
      const double* xh = bc.norm2.xhat.plane(k);
      double* out = dxhat2.plane(k);
      double sg = 0.0;
      double sgx = 0.0;
      for (std::size_t q = 0; q < n; ++q) {
        sg += g[q];
        sgx += g[q] * xh[q];
        out[q] = g[q] * gamma2[k];
      }
      dgamma2[k] += sgx;
      dbeta2[k] += sg;
    }
    Maps dr1;
    conv_backward(bc.r1, p.at(pre + "conv2.weight"), c, norm_backward(bc.norm2, dxhat2),
                  grad(pre + "conv2.weight"), grad(pre + "conv2.bias"), &dr1);

    // First normalisation, affine and ReLU.
    const double* gamma1 = p.at(pre + "norm1.gamma");
    double* dgamma1 = grad(pre + "norm1.gamma");
    double* dbeta1 = grad(pre + "norm1.beta");
    Maps dxhat1(c, ds.h, ds.w);
    for (std::size_t k = 0; k < c; ++k) {
      double* g = dr1.plane(k);
      const double* r = bc.r1.plane(k);
      const double* xh = bc.norm1.xhat.plane(k);
      double* out = dxhat1.plane(k);
      double sg = 0.0;
      double sgx = 0.0;
      for (std::size_t q = 0; q < n; ++q) {
        const double gq = r[q] > 0.0 ? g[q] : 0.0;
        sg += gq;
        sgx += gq * xh[q];
        out[q] = gq * gamma1[k];
      }
      dgamma1[k] += sgx;
      dbeta1[k] += sg;
    }
    Maps dx_conv;
    conv_backward(block_in, p.at(pre + "conv1.weight"), c, norm_backward(bc.norm1, dxhat1),
                  grad(pre + "conv1.weight"), grad(pre + "conv1.bias"), &dx_conv);

    dx = std::move(ds);
    for (std::size_t k = 0; k < dx.v.size(); ++k) dx.v[k] += dx_conv.v[k];
  }

  for (std::size_t k = 0; k < dx.v.size(); ++k) {
    if (cache.x0.v[k] <= 0.0) dx.v[k] = 0.0;
  }
  conv_backward(cache.input, p.at("input.weight"), c, dx, grad("input.weight"),
                grad("input.bias"), nullptr);
  return result;
}

double sample_loss(const RinetLite& model, const Sample& sample, LossTerms terms) {
  check_sample(sample);
  return select_loss(predict(model, sample.image), sample, terms).total();
}

// ---------------------------------------------------------------------------
// Optimisation

void TrainConfig::validate() const {
  if (epochs < 1) throw InvalidArgument("epochs must be >= 1");
  if (decay_epochs < 0 || decay_epochs > epochs) {
    throw InvalidArgument("decay window must lie in [0, epochs]");
  }
  if (!(base_lr > 0.0) || !std::isfinite(base_lr)) {
    throw InvalidArgument("learning rate must be > 0");
  }
  if (batch_size < 1) throw InvalidArgument("batch size must be >= 1");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) || !(epsilon > 0.0)) {
    throw InvalidArgument("invalid Adam moments");
  }
}

double learning_rate(const TrainConfig& cfg, int epoch) {
  if (epoch < 0 || epoch >= cfg.epochs) {
    throw std::out_of_range(fmt::format("epoch {} outside [0, {})", epoch, cfg.epochs));
  }
  const int decay_start = cfg.epochs - cfg.decay_epochs;
  if (epoch < decay_start) return cfg.base_lr;
  return cfg.base_lr * static_cast<double>(cfg.epochs - epoch) /
         static_cast<double>(cfg.decay_epochs);
}

Adam::Adam(std::size_t size, double beta1, double beta2, double epsilon)
    : beta1_(beta1), beta2_(beta2), epsilon_(epsilon), m_(size, 0.0), v_(size, 0.0) {}

void Adam::step(std::span<double> params, std::span<const double> grads, double lr) {
  if (params.size() != m_.size() || grads.size() != m_.size()) {
    throw InvalidArgument("Adam: parameter/gradient size mismatch");
  }
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    m_[k] = beta1_ * m_[k] + (1.0 - beta1_) * grads[k];
    v_[k] = beta2_ * v_[k] + (1.0 - beta2_) * grads[k] * grads[k];
    const double m_hat = m_[k] / c1;
    const double v_hat = v_[k] / c2;
    params[k] -= lr * m_hat / (std::sqrt(v_hat) + epsilon_);
  }
}

TrainResult train(RinetLite model, const std::vector<Sample>& dataset, const TrainConfig& cfg,
                  const std::function<void(const EpochStats&)>& on_epoch) {
  cfg.validate();
  if (dataset.empty()) throw InvalidArgument("training dataset is empty");
  for (const auto& s : dataset) {
    check_sample(s);
    if (s.image.height() != dataset[0].image.height() ||
        s.image.width() != dataset[0].image.width()) {
      throw InvalidArgument("training samples differ in size");
    }
  }

  Rng rng(cfg.seed);
  Adam adam(model.parameters().size(), cfg.beta1, cfg.beta2, cfg.epsilon);
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> batch_grad(model.parameters().size());
  const auto batch = static_cast<std::size_t>(cfg.batch_size);

  TrainResult result{model, {}};
  std::size_t step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = learning_rate(cfg, epoch);
    rng.shuffle(order);
    EpochStats stats{epoch, lr, 0.0, 0.0, 0.0};

    for (std::size_t begin = 0; begin < order.size(); begin += batch) {
      const std::size_t end = std::min(begin + batch, order.size());
      std::fill(batch_grad.begin(), batch_grad.end(), 0.0);
      for (std::size_t k = begin; k < end; ++k) {
        const auto lg = loss_and_gradient(result.model, dataset[order[k]]);
        if (!std::isfinite(lg.loss.total())) {
          throw TrainingError(fmt::format("non-finite loss at step {} (epoch {})", step, epoch),
                              step);
        }
        stats.loss += lg.loss.total();
        stats.raydrop_loss += lg.loss.raydrop();
        stats.intensity_loss += lg.loss.intensity();
        for (std::size_t q = 0; q < batch_grad.size(); ++q) batch_grad[q] += lg.gradient[q];
      }
      const double inv = 1.0 / static_cast<double>(end - begin);
      for (double& g : batch_grad) g *= inv;
      adam.step(result.model.parameters(), batch_grad, lr);
      ++step;
    }

    const double inv_n = 1.0 / static_cast<double>(dataset.size());
    stats.loss *= inv_n;
    stats.raydrop_loss *= inv_n;
    stats.intensity_loss *= inv_n;
    result.trace.push_back(stats);
    if (on_epoch) on_epoch(stats);
  }
  return result;
}

namespace {

// Sign pattern of the raydrop residual; a change between stencil points means
// the L1 kink was crossed.
std::vector<signed char> residual_signs(const PredictorOutput& pred, const Sample& sample) {
  std::vector<signed char> s(pred.raydrop.size());
  for (std::size_t k = 0; k < s.size(); ++k) {
    const double label = sample.mask.value.data()[k] > 0.0 ? 1.0 : 0.0;
    s[k] = static_cast<signed char>(sign(pred.raydrop.data()[k] - label));
  }
  return s;
}

// Which units of every ReLU are active.
std::vector<bool> relu_pattern(const RinetLite& model, const AppearanceImage& image) {
  const ForwardCache cache = forward(model, image);
  std::vector<bool> on;
  auto add = [&](const Maps& m) {
    for (double v : m.v) on.push_back(v > 0.0);
  };
  add(cache.x0);
  for (const auto& b : cache.blocks) {
    add(b.r1);
    add(b.out);
  }
  return on;
}

}  // namespace

double gradient_check(const RinetLite& model, const Sample& sample, std::size_t probes,
                      std::uint64_t seed, LossTerms terms) {
  if (probes == 0) return 0.0;
  constexpr double kStep = 1e-4;
  const auto analytic = loss_and_gradient(model, sample, terms).gradient;
  const bool check_kinks = terms != LossTerms::kIntensity;
  const auto base_signs = residual_signs(predict(model, sample.image), sample);
  const auto base_relu = relu_pattern(model, sample.image);

  Rng rng(seed);
  RinetLite probe = model;
  double worst = 0.0;
  std::size_t done = 0;
  for (std::size_t attempt = 0; done < probes && attempt < probes * 20; ++attempt) {
    const std::size_t k = rng.index(model.parameters().size());
    const double original = probe.parameters()[k];

    probe.parameters()[k] = original + kStep;
    const auto pred_plus = predict(probe, sample.image);
    const bool relu_plus = relu_pattern(probe, sample.image) == base_relu;
    probe.parameters()[k] = original - kStep;
    const auto pred_minus = predict(probe, sample.image);
    const bool relu_minus = relu_pattern(probe, sample.image) == base_relu;
    probe.parameters()[k] = original;

    if (!relu_plus || !relu_minus) continue;
    if (check_kinks && (residual_signs(pred_plus, sample) != base_signs ||
                        residual_signs(pred_minus, sample) != base_signs)) {
      continue;
    }
    const double f_plus = select_loss(pred_plus, sample, terms).total();
    const double f_minus = select_loss(pred_minus, sample, terms).total();
    const double numeric = (f_plus - f_minus) / (2.0 * kStep);
    const double denom = std::max(1e-8, std::abs(analytic[k]) + std::abs(numeric));
    worst = std::max(worst, std::abs(analytic[k] - numeric) / denom);
    ++done;
  }
  return worst;
}

}  // namespace lidarsim
