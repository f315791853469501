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

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "rags/camera.hpp"
#include "rags/nn.hpp"
#include "rags/types.hpp"

namespace rags {

// Radar pillars on the BEV grid. Feature channels: the first half is derived
// from point geometry, the second half from RCS / velocity statistics.
struct PillarSet {
  std::vector<std::array<int, 2>> coords;
  FeatureMatrix features;  // G x C

  std::size_t size() const { return coords.size(); }
  int channels() const { return static_cast<int>(features.cols()); }
};

// Deterministic pillarizer: per occupied cell, mean point offset from the
// cell center, max RCS and mean velocity, projected to `channels` by two
// seeded linear maps. Points outside the grid are dropped; coords are sorted.
PillarSet pillarize(const RadarCloud& radar, const BevGeometry& grid, int channels,
                    std::uint64_t seed);

using VoxelCoord = std::array<int, 3>;

// Voxel lattice aligned with the BEV grid and extended along z.
struct VoxelGridSpec {
  Vec3 origin = Vec3(0.0, -6.4, -0.96);
  double voxel_size = 0.32;
  int nx = 40;
  int ny = 40;
  int nz = 8;

  std::optional<VoxelCoord> voxel_of(const Vec3& p) const;
  bool in_bounds(const VoxelCoord& c) const {
    return c[0] >= 0 && c[0] < nx && c[1] >= 0 && c[1] < ny && c[2] >= 0 && c[2] < nz;
  }
};

// Hash-indexed sparse voxel grid. Inserting an occupied coordinate adds the
// feature into the existing site.
class SparseVoxelGrid {
 public:
  SparseVoxelGrid(const std::array<int, 3>& dims, int channels);

  std::size_t insert(const VoxelCoord& coord, std::span<const double> feature);
  std::optional<std::size_t> find(const VoxelCoord& coord) const;

  std::size_t size() const { return coords_.size(); }
  int channels() const { return channels_; }
  const std::array<int, 3>& dims() const { return dims_; }
  const std::vector<VoxelCoord>& coords() const { return coords_; }
  std::span<const double> value(std::size_t site) const {
    return {values_.data() + site * channels_, static_cast<std::size_t>(channels_)};
  }

 private:
  std::int64_t key(const VoxelCoord& c) const {
    return (static_cast<std::int64_t>(c[0]) * dims_[1] + c[1]) * dims_[2] + c[2];
  }

  std::array<int, 3> dims_;
  int channels_;
  std::vector<VoxelCoord> coords_;
  std::vector<double> values_;
  std::unordered_map<std::int64_t, std::size_t> index_;
};

// Each pillar becomes z_levels voxels (ix, iy, 0..Z-1) sharing its feature.
SparseVoxelGrid replicate_pillars(const PillarSet& pillars, int z_levels, int nx, int ny);

// Lazily evaluated F2D (x) Dprob: V[h, w, d, c] = F2D[h, w, c] * Dprob[h, w, d].
class VolumeView {
 public:
  explicit VolumeView(const FeatureVolume& fv);

  int height() const { return h_; }
  int width() const { return w_; }
  int bins() const { return d_; }
  int channels() const { return c_; }

  double at(int h, int w, int d, int c) const {
    return fv_->feature_map[(static_cast<std::size_t>(h) * w_ + w) * c_ + c] *
           fv_->depth_prob[(static_cast<std::size_t>(h) * w_ + w) * d_ + d];
  }

  // acc += weight * V[h, w, d, :]
  void accumulate(int h, int w, int d, double weight, double* acc) const;

 private:
  const FeatureVolume* fv_;
  int h_;
  int w_;
  int d_;
  int c_;
};

VolumeView build_volume(const FeatureVolume& fv);

// Trilinear sample at continuous (u, v, b). Corners outside the volume
// contribute zero.
Eigen::VectorXd trilinear(const VolumeView& volume, double u, double v, double b);

struct ImaConfig {
  int num_iterations = 3;
  int num_offsets = 4;
  // Offset bound in frustum units: (u px, v px, depth m).
  Vec3 offset_scale = Vec3(8.0, 8.0, 2.0);
  int z_levels = 8;

  void validate() const;
};

// Learned pieces of the deformable cross-attention (seeded here).
struct DcaWeights {
  DenseStack offsets;        // C -> 3T, raw; tanh-bounded by offset_scale
  DenseStack attention;      // C -> T, softmax-normalized
  Eigen::MatrixXd projection;  // C x C_img

  static DcaWeights seeded(int channels, int image_channels, int num_offsets, std::uint64_t seed);
};

// 3x3x3 submanifold sparse convolution weights. Taps indexed
// ((dx+1)*9 + (dy+1)*3 + (dz+1)), each C_out x C_in.
struct SparseConv3d {
  int in_channels = 0;
  int out_channels = 0;
  std::vector<Eigen::MatrixXd> taps;
  Eigen::VectorXd bias;

  static SparseConv3d seeded(int in_channels, int out_channels, std::uint64_t seed);
  static SparseConv3d zeros(int in_channels, int out_channels);
  static SparseConv3d identity(int channels);
  const Eigen::MatrixXd& tap(int dx, int dy, int dz) const {
    return taps[static_cast<std::size_t>((dx + 1) * 9 + (dy + 1) * 3 + (dz + 1))];
  }
  Eigen::MatrixXd& tap(int dx, int dy, int dz) {
    return taps[static_cast<std::size_t>((dx + 1) * 9 + (dy + 1) * 3 + (dz + 1))];
  }
};

struct ImaLayerWeights {
  DcaWeights dca;
  SparseConv3d fuse;
  DenseStack refine;  // C + 3 -> hidden -> 3, outputs (dh, dw, dd) before tanh

  static ImaLayerWeights seeded(int channels, int image_channels, int num_offsets,
                                std::uint64_t seed);
};

// Normalized frustum coordinates fed to the refinement MLP: (u/W, v/H, d/d_max).
Vec3 normalized_frustum(const CameraModel& camera, const FrustumPoint& f);

// Replaces features with sum_n A_n W phi(V, P(p) + dq_n). Gaussians outside
// the camera FoV (or behind it) keep their features.
FeatureMatrix deformable_attend(const GaussianField& field, const FeatureVolume& fv,
                                const CameraModel& camera, const DcaWeights& weights,
                                const ImaConfig& config);

// Voxelizes Gaussian means, inserts radar voxels into the same grid, applies
// one submanifold 3x3x3 convolution and writes each Gaussian its own voxel's
// output. Gaussians outside the grid keep their features.
FeatureMatrix sparse_fuse(const GaussianField& field, const SparseVoxelGrid& radar_voxels,
                          const SparseConv3d& weights, const VoxelGridSpec& grid);

// Frustum offset for one Gaussian: tanh(MLP([F | P(p)])) * offset_scale,
// returned as (du, dv, dd).
Vec3 predict_offset(const DenseStack& refine, const Eigen::Ref<const Eigen::RowVectorXd>& feature,
                    const CameraModel& camera, const FrustumPoint& f, const Vec3& offset_scale);

// P <- P^{-1}(P(p) + dp). Gaussians with non-positive depth are skipped.
std::vector<Vec3> refine_positions(const GaussianField& field, const CameraModel& camera,
                                   const DenseStack& refine, const Vec3& offset_scale);

// M rounds of attend -> fuse -> refine; returns every round's field.
std::vector<GaussianField> run_ima(const GaussianField& field, const FeatureVolume& fv,
                                   const PillarSet& pillars, const CameraModel& camera,
                                   std::span<const ImaLayerWeights> weights, const ImaConfig& config,
                                   const VoxelGridSpec& grid);

}  // namespace rags
