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

#include <cstddef>
#include <span>
#include <vector>

#include "rags/camera.hpp"
#include "rags/ima.hpp"
#include "rags/nn.hpp"
#include "rags/tensor.hpp"
#include "rags/types.hpp"

namespace rags {

struct SplatConfig {
  BevGeometry grid;
  double cutoff_sigma = 3.0;
  int tile_size = 16;
  int levels = 2;
  int threads = 1;

  void validate() const;
};

// Covariance eigenvalues are floored here (m^2).
inline constexpr double kCovarianceFloor = 1e-8;

// 3x3 rotation of a unit (w, x, y, z) quaternion. Throws NonUnitQuaternion
// when |q| deviates from 1 by more than 1e-6.
Mat3 quaternion_to_rotation(const Quat& q);

// R diag(s^2) R^T.
Mat3 covariance_3d(const Quat& rotation, const Vec3& scale);

// Symmetric 2x2 matrix with eigenvalues floored at kCovarianceFloor.
Mat2 floor_covariance(const Mat2& cov);

// Top-left (x, y) block of the 3D covariance with the eigenvalue floor applied.
Mat2 bev_covariance(const Quat& rotation, const Vec3& scale);

// Per-call instrumentation for benchmarks.
struct RasterStats {
  std::vector<std::size_t> gaussians_per_tile;
  std::size_t tiles_x = 0;
  std::size_t tiles_y = 0;
  std::size_t pairs_evaluated = 0;
  std::size_t cells_written = 0;
};

// Gaussian footprint in BEV: mean, inverse covariance and inclusive cell bbox.
struct SplatFootprint {
  Vec2 mean = Vec2::Zero();
  double conic_xx = 0.0;
  double conic_xy = 0.0;
  double conic_yy = 0.0;
  int ix0 = 0;
  int ix1 = -1;
  int iy0 = 0;
  int iy1 = -1;

  bool empty() const { return ix1 < ix0 || iy1 < iy0; }
  double mahalanobis(const Vec2& cell) const {
    const double dx = cell.x() - mean.x();
    const double dy = cell.y() - mean.y();
    return dx * dx * conic_xx + 2.0 * dx * dy * conic_xy + dy * dy * conic_yy;
  }
};

SplatFootprint splat_footprint(const Vec3& position, const Quat& rotation, const Vec3& scale,
                               const SplatConfig& config);

// Opacity-weighted sum of Gaussian features per BEV cell, restricted to cells
// within cutoff_sigma Mahalanobis distance. Tile-binned and parallel over
// tiles; the result does not depend on config.threads.
BevGrid rasterize(const GaussianField& field, const SplatConfig& config, RasterStats* stats = nullptr);

// Reference path: every cell against every Gaussian.
BevGrid rasterize_naive(const GaussianField& field, const SplatConfig& config);

struct RasterGrads {
  std::vector<Vec2> position_xy;
  std::vector<Vec3> scale;
  std::vector<double> opacity;
  FeatureMatrix features;
};

// Gradients of <upstream, rasterize(field)> with the cutoff treated as a hard zero.
RasterGrads rasterize_backward(const GaussianField& field, const SplatConfig& config,
                               const BevGrid& upstream);

// Channel-concatenates the levels and applies a 3x3 convolution.
BevGrid fuse_levels(std::span<const BevGrid> levels, const Conv2d& conv);

// Scatters pillar features into an X x Y x C_p raster (zeros elsewhere).
BevGrid scatter_pillars(const PillarSet& pillars, const BevGeometry& grid);

// Concatenates [f_gs | scattered pillars] and applies a 3x3 convolution.
BevGrid cross_modal_fuse(const BevGrid& f_gs, const PillarSet& pillars, const Conv2d& conv);

// BEV segmentation logits: 1x1 convolution of the fused map to one channel.
BevGrid bev_seg_logits(const BevGrid& f_bev, const Conv2d& head);

struct DepthRender {
  Tensor depth;  // H x W, 0 where accumulated opacity < 1e-4
  Tensor alpha;  // H x W accumulated opacity
};

inline constexpr double kMinAccumulatedAlpha = 1e-4;

// Front-to-back alpha compositing of camera-projected Gaussians; depth is the
// unnormalized sum T_i * alpha_i * d_i.
DepthRender render_depth(const GaussianField& field, const CameraModel& camera,
                         double cutoff_sigma = 3.0);

// Gradient of sum(upstream * depth) with respect to Gaussian opacities.
std::vector<double> render_depth_opacity_grad(const GaussianField& field, const CameraModel& camera,
                                              const Tensor& upstream, double cutoff_sigma = 3.0);

}  // namespace rags
