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
 * \file cli.hpp
 * Command-line workflows and the paired-fixture dataset layout they share.
 *
 * A dataset directory holds, for frame k (4-digit, zero padded):
 *   image_k.rtns  appearance [3, H, W]
 *   mask_k.rtns   dense intensity mask [2, H, W]
 *   range_k.rtns  clean range image [2, rows, cols]
 *   scene_k.txt   the scene description
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "lidarsim/io.hpp"
#include "lidarsim/model.hpp"
#include "lidarsim/scene.hpp"

namespace lidarsim {

struct DatasetFrame {
  Scene scene;
  Frame frame;
  DenseIntensityMask mask;
};

/// Frame k of a dataset generated from `seed` renders random_scene(seed + k).
DatasetFrame generate_frame(std::uint64_t scene_seed, const Rig& rig);

void write_dataset(const std::filesystem::path& dir, std::uint64_t seed, int count,
                   const Rig& rig);

/// Reads image/mask pairs for k = 0, 1, ... until the first missing index.
std::vector<Sample> load_dataset(const std::filesystem::path& dir);

/// Exit codes of run_cli.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Runs one CLI invocation; args[0] is the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lidarsim
