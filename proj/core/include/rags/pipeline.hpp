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

#include <string>
#include <vector>

#include "rags/config.hpp"
#include "rags/scene.hpp"
#include "rags/splat.hpp"

namespace rags {

// Stand-in for the image branch: segmentation logits, a per-pixel depth
// distribution, its expectation and a feature map, all derived from the
// scene's ground truth plus seeded noise.
struct ImageCues {
  Tensor seg_logits;  // H x W
  Tensor depth;       // H x W expected depth
  FeatureVolume volume;
};

ImageCues synthesize_image_cues(const Scene& scene, int image_channels, std::uint64_t seed);

// Seeded weights of every learned block.
struct PipelineWeights {
  std::vector<ImaLayerWeights> ima;
  Conv2d fuse;        // L*C -> C, 3x3
  Conv2d cross;       // 2C -> C, 3x3
  Conv2d seg_head;    // C -> 1, 1x1

  static PipelineWeights seeded(const PipelineConfig& config);
};

struct StageTiming {
  std::string stage;
  double milliseconds = 0.0;
};

struct PipelineResult {
  ImageCues cues;
  std::vector<Vec3> init_positions;
  GaussianField init;
  PillarSet pillars;
  std::vector<GaussianField> rounds;  // M fields
  std::vector<BevGrid> levels;        // last L rounds rasterized
  BevGrid f_gs;
  BevGrid f_bev;
  BevGrid seg_logits;
  DepthRender depth;
  double depth_render_loss = 0.0;
  double seg_render_loss = 0.0;
  double det_loss = 0.0;
  double total_loss = 0.0;
  std::vector<StageTiming> timings;
};

// Image cues -> initialization -> M aggregation rounds -> multi-level BEV
// fusion -> depth render and losses. Throws ConfigError for invalid configs.
PipelineResult run_pipeline(const Scene& scene, const PipelineConfig& config);

inline constexpr double kSmokeLearningRate = 10.0;

// Gradient descent on opacity logits against the scene depth (L1 over valid
// pixels). Returns the loss before every step.
std::vector<double> smoke_descent(const GaussianField& field, const CameraModel& camera, const Tensor& gt_depth,
                                  int steps, double learning_rate = kSmokeLearningRate,
                                  double cutoff_sigma = 3.0);

// Mean over a sliding window of `window` values.
std::vector<double> moving_average(const std::vector<double>& values, std::size_t window);

}  // namespace rags
