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

#include "rags/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "rags/errors.hpp"
#include "rags/fli.hpp"
#include "rags/rng.hpp"

namespace rags {

namespace {

enum Stream : std::uint64_t {
  kCueStream = 11,
  kCueNetStream = 12,
  kSampleStream = 13,
  kFieldStream = 14,
  kPillarStream = 15,
  kFuseStream = 16,
  kCrossStream = 17,
  kSegHeadStream = 18,
  kImaStreamBase = 100,
};

constexpr double kSegLogitMagnitude = 3.0;
constexpr double kSegLogitNoise = 0.5;
constexpr double kDepthSpread = 1.0;  // m
constexpr int kCueWidth = 5;
constexpr int kCueHidden = 16;
constexpr double kMaxOpacityLogit = 12.0;

class Stopwatch {
 public:
  explicit Stopwatch(std::vector<StageTiming>& sink) : sink_(sink), start_(Clock::now()) {}

  void lap(const std::string& stage) {
    const auto now = Clock::now();
    sink_.push_back({stage, std::chrono::duration<double, std::milli>(now - start_).count()});
    start_ = now;
  }

 private:
  using Clock = std::chrono::steady_clock;
  std::vector<StageTiming>& sink_;
  Clock::time_point start_;
};

}  // namespace

ImageCues synthesize_image_cues(const Scene& scene, int image_channels, std::uint64_t seed) {
  if (image_channels < 1) throw InvalidArgument("image_channels must be >= 1");
  const CameraModel& cam = scene.camera;
  const std::size_t h = static_cast<std::size_t>(cam.height());
  const std::size_t w = static_cast<std::size_t>(cam.width());
  const auto& bins = cam.depth_bins();
  const std::size_t d = bins.size();
  if (scene.gt_depth.shape() != std::vector<std::size_t>{h, w} || scene.gt_seg.shape() != scene.gt_depth.shape()) {
    throw DimensionMismatch("scene rasters do not match the camera image size");
  }

  ImageCues cues;
  cues.seg_logits = Tensor({h, w});
  cues.volume.depth_prob = Tensor({h, w, d});
  cues.volume.sparse_depth = Tensor({h, w});
  CounterRng rng(seed, kCueStream);
  for (std::size_t px = 0; px < h * w; ++px) {
    const double sign = scene.gt_seg[px] > 0.5 ? 1.0 : -1.0;
    cues.seg_logits[px] = sign * kSegLogitMagnitude + kSegLogitNoise * rng.normal();

    const double target = scene.gt_depth[px] > 0.0 ? scene.gt_depth[px] : bins.back();
    double total = 0.0;
    for (std::size_t b = 0; b < d; ++b) {
      const double z = (bins[b] - target) / kDepthSpread;
      const double p = std::exp(-0.5 * z * z);
      cues.volume.depth_prob[px * d + b] = p;
      total += p;
    }
    for (std::size_t b = 0; b < d; ++b) cues.volume.depth_prob[px * d + b] /= total;
  }
  cues.depth = depth_expectation(cues.volume.depth_prob, bins);

  for (const auto& p : scene.radar.points) {
    if (!in_fov(cam, p.position())) continue;
    const FrustumPoint f = project(cam, p.position());
    const std::size_t px = static_cast<std::size_t>(std::floor(f.v)) * w + static_cast<std::size_t>(std::floor(f.u));
    double& slot = cues.volume.sparse_depth[px];
    if (slot == 0.0 || f.d < slot) slot = f.d;
  }

  Eigen::MatrixXd input(static_cast<Eigen::Index>(h * w), kCueWidth);
  const double d_max = bins.back();
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      const std::size_t px = r * w + c;
      const auto row = static_cast<Eigen::Index>(px);
      input(row, 0) = sigmoid(cues.seg_logits[px]);
      input(row, 1) = cues.depth[px] / d_max;
      input(row, 2) = static_cast<double>(c) / static_cast<double>(w);
      input(row, 3) = static_cast<double>(r) / static_cast<double>(h);
      input(row, 4) = cues.volume.sparse_depth[px] / d_max;
    }
  }
  const int widths[] = {kCueWidth, kCueHidden, image_channels};
  const Activation acts[] = {Activation::kRelu, Activation::kNone};
  const DenseStack net = DenseStack::seeded(widths, acts, derive_seed(seed, kCueNetStream));
  const Eigen::MatrixXd features = net.forward_rows(input);
  const auto ci = static_cast<std::size_t>(image_channels);
  cues.volume.feature_map = Tensor({h, w, ci});
  for (std::size_t px = 0; px < h * w; ++px) {
    for (std::size_t k = 0; k < ci; ++k) {
      cues.volume.feature_map[px * ci + k] = features(static_cast<Eigen::Index>(px), static_cast<Eigen::Index>(k));
    }
  }
  return cues;
}

PipelineWeights PipelineWeights::seeded(const PipelineConfig& config) {
  PipelineWeights w;
  const int c = config.feature_width;
  for (int m = 0; m < config.ima.num_iterations; ++m) {
    w.ima.push_back(ImaLayerWeights::seeded(c, config.image_channels, config.ima.num_offsets,
                                            derive_seed(config.seed, kImaStreamBase + static_cast<std::uint64_t>(m))));
  }
  w.fuse = Conv2d::seeded(config.splat.levels * c, c, 3, derive_seed(config.seed, kFuseStream));
  w.cross = Conv2d::seeded(2 * c, c, 3, derive_seed(config.seed, kCrossStream));
  w.seg_head = Conv2d::seeded(c, 1, 1, derive_seed(config.seed, kSegHeadStream));
  return w;
}

PipelineResult run_pipeline(const Scene& scene, const PipelineConfig& config) {
  config.validate();
  if (!(scene.bev == config.splat.grid)) {
    throw ConfigError({"scene BEV geometry differs from splat.grid"});
  }
  const CameraModel& camera = scene.camera;
  const int c = config.feature_width;
  PipelineResult out;
  Stopwatch clock(out.timings);

  out.cues = synthesize_image_cues(scene, config.image_channels, derive_seed(config.seed, kCueStream));
  clock.lap("image_cues");

  const auto pixels = select_foreground(out.cues.seg_logits, out.cues.depth, config.init.top_k);
  const auto p_unproj = unproject_foreground(camera, pixels);
  const auto p_sample = sample_frustum(camera, config.init, derive_seed(config.seed, kSampleStream));
  const auto candidates = frustum_candidates(camera, config.init);
  const auto p_radar = scene.radar.positions();
  out.init_positions = gather_positions(p_unproj, p_sample, p_radar, candidates, config.init);
  out.init = init_field(out.init_positions, c, derive_seed(config.seed, kFieldStream), config.init.voxel_size);
  clock.lap("initialization");

  out.pillars = pillarize(scene.radar, config.splat.grid, c, derive_seed(config.seed, kPillarStream));
  const PipelineWeights weights = PipelineWeights::seeded(config);
  out.rounds = run_ima(out.init, out.cues.volume, out.pillars, camera, weights.ima, config.ima,
                       config.voxel_grid());
  clock.lap("aggregation");

  const std::size_t m = out.rounds.size();
  const auto l = static_cast<std::size_t>(config.splat.levels);
  for (std::size_t i = m - l; i < m; ++i) out.levels.push_back(rasterize(out.rounds[i], config.splat));
  out.f_gs = fuse_levels(out.levels, weights.fuse);
  out.f_bev = cross_modal_fuse(out.f_gs, out.pillars, weights.cross);
  out.seg_logits = bev_seg_logits(out.f_bev, weights.seg_head);
  clock.lap("bev_fusion");

  out.depth = render_depth(out.rounds.back(), camera, config.splat.cutoff_sigma);
  clock.lap("depth_render");

  try {
    out.depth_render_loss = depth_l1_loss(out.depth.depth, scene.gt_depth);
  } catch (const NoValidPixels&) {
    out.depth_render_loss = 0.0;
  }
  out.seg_render_loss = bce_with_logits(out.seg_logits.data(), scene.gt_occupancy.data());
  out.det_loss = config.det_loss;
  out.total_loss = total_loss(out.det_loss, out.depth_render_loss, out.seg_render_loss, config.loss);
  clock.lap("losses");
  return out;
}

std::vector<double> smoke_descent(const GaussianField& field, const CameraModel& camera, const Tensor& gt_depth,
                                  int steps, double learning_rate, double cutoff_sigma) {
  if (steps < 0) throw InvalidArgument("steps must be non-negative");
  GaussianField work = field;
  std::vector<double> theta(work.size());
  for (std::size_t i = 0; i < work.size(); ++i) {
    const double o = std::clamp(work.opacities[i], 1e-6, 1.0 - 1e-6);
    theta[i] = std::log(o / (1.0 - o));
  }
  std::size_t valid = 0;
  for (double g : gt_depth.data()) valid += g > 0.0 ? 1 : 0;
  if (valid == 0) throw NoValidPixels("ground-truth depth has no valid pixels");

  std::vector<double> losses;
  Tensor upstream(gt_depth.shape());
  for (int step = 0; step < steps; ++step) {
    for (std::size_t i = 0; i < work.size(); ++i) work.opacities[i] = sigmoid(theta[i]);
    const DepthRender render = render_depth(work, camera, cutoff_sigma);
    losses.push_back(depth_l1_loss(render.depth, gt_depth));
    for (std::size_t px = 0; px < gt_depth.size(); ++px) {
      const double diff = render.depth[px] - gt_depth[px];
      upstream[px] = gt_depth[px] > 0.0 ? ((diff > 0.0) - (diff < 0.0)) / static_cast<double>(valid) : 0.0;
    }
    const auto grad = render_depth_opacity_grad(work, camera, upstream, cutoff_sigma);
    for (std::size_t i = 0; i < work.size(); ++i) {
      const double s = work.opacities[i];
      theta[i] = std::min(theta[i] - learning_rate * grad[i] * s * (1.0 - s), kMaxOpacityLogit);
    }
  }
  return losses;
}

std::vector<double> moving_average(const std::vector<double>& values, std::size_t window) {
  if (window == 0) throw InvalidArgument("window must be positive");
  std::vector<double> out;
  if (values.size() < window) return out;
  for (std::size_t i = 0; i + window <= values.size(); ++i) {
    double sum = 0.0;
    for (std::size_t k = 0; k < window; ++k) sum += values[i + k];
    out.push_back(sum / static_cast<double>(window));
  }
  return out;
}

}  // namespace rags
