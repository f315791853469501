// Copyright 2026 The rags Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rags/fli.hpp"
#include "rags/ima.hpp"
#include "rags/nn.hpp"
#include "rags/splat.hpp"

namespace rags {

// Every reproducible knob of one pipeline run.
struct PipelineConfig {
  std::uint64_t seed = 0;
  int feature_width = 32;   // C, Gaussian and BEV channels
  int image_channels = 16;  // channels of the image feature map
  InitConfig init;
  ImaConfig ima;
  SplatConfig splat{BevGeometry{Vec2(0.0, -6.4), 0.32, 40, 40}};
  LossWeights loss;
  double det_loss = 0.0;  // opaque detection term entering the total loss

  // Radar voxel grid derived from init.range, init.voxel_size and ima.z_levels.
  VoxelGridSpec voxel_grid() const;

  // Every violated constraint, empty when the config is consistent.
  std::vector<std::string> violations() const;
  // Throws ConfigError listing all violations.
  void validate() const;
};

PipelineConfig desk_config();

std::string config_to_text(const PipelineConfig& config);
// Missing fields keep their defaults; unknown fields are violations.
// Throws ParseError for malformed text and ConfigError for inconsistent values.
PipelineConfig config_from_text(const std::string& text);
PipelineConfig load_config(const std::filesystem::path& path);
void save_config(const std::filesystem::path& path, const PipelineConfig& config);

}  // namespace rags
