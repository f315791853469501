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
#include <vector>

#include <Eigen/Core>

#include "rags/camera.hpp"
#include "rags/tensor.hpp"

namespace rags {

// Unit quaternion stored as (w, x, y, z).
using Quat = Eigen::Vector4d;
using FeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline Quat identity_quat() { return {1.0, 0.0, 0.0, 0.0}; }

// Width of the explicit attribute block [position | rotation | scale | opacity].
inline constexpr int kExplicitWidth = 11;

// N anisotropic Gaussians in the radar frame, each carrying a feature row.
struct GaussianField {
  std::vector<Vec3> positions;
  std::vector<Quat> rotations;
  std::vector<Vec3> scales;
  std::vector<double> opacities;
  FeatureMatrix features;  // N x C

  std::size_t size() const { return positions.size(); }
  int feature_width() const { return static_cast<int>(features.cols()); }

  // N x 11 block [P | R | S | O].
  Eigen::MatrixXd explicit_block() const;

  // Throws InvalidArgument naming the first violated invariant.
  void validate() const;

  friend bool operator==(const GaussianField& a, const GaussianField& b);
};

// Packs [explicit | features] into an N x (11 + C) tensor and back.
Tensor field_to_tensor(const GaussianField& field);
GaussianField field_from_tensor(const Tensor& packed);

// Image feature map F2D (H x W x C), per-pixel depth distribution (H x W x D)
// and sparse radar depth (H x W, zero where no return).
struct FeatureVolume {
  Tensor feature_map;
  Tensor depth_prob;
  Tensor sparse_depth;

  std::size_t height() const { return feature_map.dim(0); }
  std::size_t width() const { return feature_map.dim(1); }
  std::size_t channels() const { return feature_map.dim(2); }
  std::size_t bins() const { return depth_prob.dim(2); }

  // Throws DimensionMismatch / UnnormalizedDistribution.
  void validate() const;
};

struct RadarPoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double rcs = 0.0;       // dB
  double velocity = 0.0;  // m/s, radial

  Vec3 position() const { return {x, y, z}; }
  friend bool operator==(const RadarPoint&, const RadarPoint&) = default;
};

struct RadarCloud {
  std::vector<RadarPoint> points;

  std::vector<Vec3> positions() const;
  bool all_finite() const;
  friend bool operator==(const RadarCloud&, const RadarCloud&) = default;
};

// World-to-cell mapping of the BEV raster. Cell (ix, iy) covers
// [ox + ix*s, ox + (ix+1)*s) x [oy + iy*s, oy + (iy+1)*s).
struct BevGeometry {
  Vec2 origin{0.0, 0.0};
  double cell_size = 0.32;
  int nx = 40;
  int ny = 40;

  Vec2 cell_center(int ix, int iy) const {
    return {origin.x() + (ix + 0.5) * cell_size, origin.y() + (iy + 0.5) * cell_size};
  }
  bool cell_of(double x, double y, int& ix, int& iy) const;
  void validate() const;

  friend bool operator==(const BevGeometry&, const BevGeometry&) = default;
};

// X x Y x C feature raster.
class BevGrid {
 public:
  BevGrid() = default;
  BevGrid(const BevGeometry& geometry, int channels);

  const BevGeometry& geometry() const { return geometry_; }
  int nx() const { return geometry_.nx; }
  int ny() const { return geometry_.ny; }
  int channels() const { return channels_; }

  double& at(int ix, int iy, int c) { return data_[index(ix, iy, c)]; }
  double at(int ix, int iy, int c) const { return data_[index(ix, iy, c)]; }
  double* cell(int ix, int iy) { return data_.data() + index(ix, iy, 0); }
  const double* cell(int ix, int iy) const { return data_.data() + index(ix, iy, 0); }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool all_finite() const;
  Tensor to_tensor() const;

 private:
  std::size_t index(int ix, int iy, int c) const {
    return (static_cast<std::size_t>(ix) * geometry_.ny + iy) * channels_ + c;
  }

  BevGeometry geometry_;
  int channels_ = 0;
  std::vector<double> data_;
};

}  // namespace rags
