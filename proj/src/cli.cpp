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

#include "lidarsim/cli.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <CLI11.hpp>
#include <ostream>
#include <stdexcept>

#include "lidarsim/densify.hpp"
#include "lidarsim/geometry.hpp"
#include "lidarsim/pipeline.hpp"

namespace lidarsim {

namespace fs = std::filesystem;

namespace {

fs::path frame_path(const fs::path& dir, const char* stem, int k, const char* ext) {
  return dir / fmt::format("{}_{:04d}.{}", stem, k, ext);
}

// Shortest round-trip text, always with a decimal point or exponent.
std::string decimal(double v) {
  std::string s = fmt::format("{}", v);
  if (s.find_first_of(".eEni") == std::string::npos) s += ".0";
  return s;
}

// Thrown for semantic usage problems that CLI11 cannot express.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RigOptions {
  std::string rig_path;
  std::string sensor;

  void attach(CLI::App* app) {
    app->add_option("--rig", rig_path, "Rig description (default: desk rig)");
    app->add_option("--sensor", sensor, "Sensor preset overriding the rig sensor");
  }

  Rig load() const {
    Rig rig = rig_path.empty() ? desk_rig() : parse_rig(read_text(rig_path));
    if (!sensor.empty()) rig.sensor = sensor_preset(sensor);
    return rig;
  }
};

}  // namespace

DatasetFrame generate_frame(std::uint64_t scene_seed, const Rig& rig) {
  DatasetFrame f;
  f.scene = random_scene(scene_seed);
  f.frame = render_frame(f.scene, rig.sensor, rig.camera);
  f.mask = build_dense_mask(f.frame.range, rig.sensor, rig.camera);
  return f;
}

void write_dataset(const fs::path& dir, std::uint64_t seed, int count, const Rig& rig) {
  if (count < 0) throw InvalidArgument("frame count must be non-negative");
  fs::create_directories(dir);
  for (int k = 0; k < count; ++k) {
    const DatasetFrame f = generate_frame(seed + static_cast<std::uint64_t>(k), rig);
    write_tensor(frame_path(dir, "image", k, "rtns"), to_tensor(f.frame.image));
    write_tensor(frame_path(dir, "mask", k, "rtns"), to_tensor(f.mask));
    write_tensor(frame_path(dir, "range", k, "rtns"), to_tensor(f.frame.range));
    write_text(frame_path(dir, "scene", k, "txt"), format_scene(f.scene));
  }
}

std::vector<Sample> load_dataset(const fs::path& dir) {
  std::vector<Sample> out;
  for (int k = 0;; ++k) {
    const fs::path image = frame_path(dir, "image", k, "rtns");
    if (!fs::exists(image)) break;
    Sample s{appearance_from_tensor(read_tensor(image)),
             mask_from_tensor(read_tensor(frame_path(dir, "mask", k, "rtns")))};
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

struct EvalTotals {
  double iou = 0.0;
  double mae = 0.0;
  std::size_t frames = 0;

  void add(const PredictorOutput& pred, const DenseIntensityMask& truth, double threshold) {
    iou += mask_iou(binarize(pred.raydrop, threshold), binarize(truth.value, 0.0));
    mae += intensity_mae(pred.intensity, truth);
    ++frames;
  }
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"LiDAR simulation with learned raydrop and intensity", "lidarsim"};
  app.require_subcommand(1);

  RigOptions rig_opts;

  // raycast
  std::string scene_path, out_range, out_image, out_cloud;
  auto* raycast = app.add_subcommand("raycast", "Render a scene to range and appearance images");
  raycast->add_option("--scene", scene_path, "Scene description")->required();
  raycast->add_option("--out-range", out_range, "Range image tensor")->required();
  raycast->add_option("--out-image", out_image, "Appearance image tensor")->required();
  raycast->add_option("--out-cloud", out_cloud, "Point cloud of the returns");

  // densify
  std::string range_path, out_path;
  auto* densify = app.add_subcommand("densify", "Build the dense intensity mask of a range image");
  densify->add_option("--range", range_path, "Range image tensor")->required();
  densify->add_option("--out", out_path, "Dense mask tensor")->required();

  // train
  std::string data_dir, weights_path;
  TrainConfig train_cfg;
  RinetConfig net_cfg;
  auto* train_cmd = app.add_subcommand("train", "Train the predictor on a dataset directory");
  train_cmd->add_option("--data", data_dir, "Dataset directory")->required();
  train_cmd->add_option("--out", weights_path, "Weights file")->required();
  train_cmd->add_option("--epochs", train_cfg.epochs)->capture_default_str();
  train_cmd->add_option("--lr", train_cfg.base_lr)->capture_default_str();
  train_cmd->add_option("--decay-epochs", train_cfg.decay_epochs)->capture_default_str();
  train_cmd->add_option("--batch", train_cfg.batch_size)->capture_default_str();
  train_cmd->add_option("--seed", train_cfg.seed)->capture_default_str();
  train_cmd->add_option("--channels", net_cfg.channels)->capture_default_str();
  train_cmd->add_option("--blocks", net_cfg.blocks)->capture_default_str();

  // predict
  std::string image_path;
  auto* predict_cmd = app.add_subcommand("predict", "Run the predictor on an appearance image");
  predict_cmd->add_option("--weights", weights_path, "Weights file")->required();
  predict_cmd->add_option("--image", image_path, "Appearance image tensor")->required();
  predict_cmd->add_option("--out", out_path, "Prediction tensor")->required();

  // enhance
  std::string cloud_path, pred_path;
  NoiseModel noise;
  EnhanceOptions enhance_opts;
  bool drop_outside = false;
  auto* enhance = app.add_subcommand("enhance", "Apply a prediction and random raydrop to a cloud");
  enhance->add_option("--cloud", cloud_path, "Input cloud")->required();
  enhance->add_option("--pred", pred_path, "Prediction tensor")->required();
  enhance->add_option("--out", out_path, "Output cloud")->required();
  enhance->add_option("--noise-p", noise.p, "Random drop probability")->capture_default_str();
  enhance->add_option("--seed", noise.seed)->capture_default_str();
  enhance->add_option("--threshold", enhance_opts.threshold)->capture_default_str();
  enhance->add_flag("--drop-out-of-frustum", drop_outside,
                    "Remove points outside the camera image instead of zeroing them");

  // eval
  std::string truth_path, pred_mask_path;
  double threshold = 0.5;
  auto* eval = app.add_subcommand("eval", "Raydrop IoU and intensity MAE against dense masks");
  auto* eval_pred = eval->add_option("--pred", pred_path, "Prediction tensor");
  auto* eval_pred_mask =
      eval->add_option("--pred-mask", pred_mask_path, "Dense mask used as the prediction");
  auto* eval_truth = eval->add_option("--truth", truth_path, "Ground-truth dense mask");
  auto* eval_weights = eval->add_option("--weights", weights_path, "Weights file");
  auto* eval_data = eval->add_option("--data", data_dir, "Dataset directory");
  eval->add_option("--threshold", threshold)->capture_default_str();
  eval_pred->excludes(eval_pred_mask)->excludes(eval_weights);
  eval_pred_mask->excludes(eval_weights);
  eval_truth->excludes(eval_data);
  eval_weights->needs(eval_data);
  eval_data->needs(eval_weights);

  // viz
  std::string in_path;
  std::size_t channel = 0;
  double scale = 1.0;
  auto* viz = app.add_subcommand("viz", "Dump one tensor channel as a PGM image");
  viz->add_option("--in", in_path, "Tensor")->required();
  viz->add_option("--out", out_path, "PGM image")->required();
  viz->add_option("--channel", channel)->capture_default_str();
  viz->add_option("--scale", scale, "Values are divided by this before clamping")
      ->capture_default_str();

  // gen-dataset
  std::uint64_t seed = 0;
  int count = 0;
  auto* gen = app.add_subcommand("gen-dataset", "Render paired fixtures from random scenes");
  gen->add_option("--seed", seed)->capture_default_str();
  gen->add_option("--count", count)->required();
  gen->add_option("--out", out_path, "Output directory")->required();

  for (auto* sub : {raycast, densify, enhance, eval, gen}) rig_opts.attach(sub);

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (raycast->parsed()) {
      const Rig rig = rig_opts.load();
      const Scene scene = parse_scene(read_text(scene_path));
      const Frame frame = render_frame(scene, rig.sensor, rig.camera);
      write_tensor(out_range, to_tensor(frame.range));
      write_tensor(out_image, to_tensor(frame.image));
      if (!out_cloud.empty()) {
        write_cloud(out_cloud, range_image_to_pointcloud(frame.range, rig.sensor));
      }
    } else if (densify->parsed()) {
      const Rig rig = rig_opts.load();
      const RangeImage ri = range_image_from_tensor(read_tensor(range_path));
      validate_range_image(ri, rig.sensor);
      write_tensor(out_path, to_tensor(build_dense_mask(ri, rig.sensor, rig.camera)));
    } else if (train_cmd->parsed()) {
      train_cfg.validate();
      const std::vector<Sample> dataset = load_dataset(data_dir);
      if (dataset.empty()) throw InvalidArgument(fmt::format("no samples in {}", data_dir));
      const TrainResult result =
          train(RinetLite::initialized(net_cfg, train_cfg.seed), dataset, train_cfg,
                [&](const EpochStats& s) {
                  fmt::print(out, "epoch={} lr={} loss={} raydrop_loss={} intensity_loss={}\n",
                             s.epoch, decimal(s.learning_rate), decimal(s.loss),
                             decimal(s.raydrop_loss), decimal(s.intensity_loss));
                });
      write_weights(weights_path, result.model);
    } else if (predict_cmd->parsed()) {
      const RinetLite model = read_weights(weights_path);
      const AppearanceImage image = appearance_from_tensor(read_tensor(image_path));
      write_tensor(out_path, to_tensor(predict(model, image)));
    } else if (enhance->parsed()) {
      const Rig rig = rig_opts.load();
      noise.validate();
      enhance_opts.out_of_frustum =
          drop_outside ? FrustumPolicy::kDrop : FrustumPolicy::kKeepZeroIntensity;
      const PointCloud cloud = read_cloud(cloud_path);
      validate_pointcloud(cloud);
      const PredictorOutput pred = prediction_from_tensor(read_tensor(pred_path));
      write_cloud(out_path, apply_random_raydrop(
                                enhance_pointcloud(cloud, pred, rig.camera, enhance_opts), noise));
    } else if (eval->parsed()) {
      EvalTotals totals;
      if (!weights_path.empty()) {
        const RinetLite model = read_weights(weights_path);
        for (const Sample& s : load_dataset(data_dir)) {
          totals.add(predict(model, s.image), s.mask, threshold);
        }
        if (totals.frames == 0) throw InvalidArgument(fmt::format("no samples in {}", data_dir));
      } else {
        if (truth_path.empty() || (pred_path.empty() && pred_mask_path.empty())) {
          throw UsageError("eval needs --pred or --pred-mask with --truth, or --weights with --data");
        }
        const DenseIntensityMask truth = mask_from_tensor(read_tensor(truth_path));
        const PredictorOutput pred =
            pred_path.empty() ? prediction_from_mask(mask_from_tensor(read_tensor(pred_mask_path)))
                              : prediction_from_tensor(read_tensor(pred_path));
        totals.add(pred, truth, threshold);
      }
      const double n = static_cast<double>(totals.frames);
      fmt::print(out, "frames={}\niou={}\nmae={}\n", totals.frames, decimal(totals.iou / n),
                 decimal(totals.mae / n));
    } else if (viz->parsed()) {
      if (!(scale > 0.0)) throw UsageError("--scale must be positive");
      GridD g = grid_from_tensor(read_tensor(in_path), channel);
      for (double& v : g.data()) v /= scale;
      write_pgm(g, out_path);
    } else if (gen->parsed()) {
      write_dataset(out_path, seed, count, rig_opts.load());
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}

}  // namespace lidarsim
