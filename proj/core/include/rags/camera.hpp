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

#include <Eigen/Core>

namespace rags {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;

// Camera-frame depths at or below this value are treated as behind the camera.
inline constexpr double kMinDepth = 1e-6;

// Frustum coordinates: continuous pixel position plus metric camera depth.
struct FrustumPoint {
  double u = 0.0;
  double v = 0.0;
  double d = 0.0;

  Vec3 as_vector() const { return {u, v, d}; }
};

// Pinhole camera with radar->camera extrinsics and a depth-bin ladder.
// Pixel (u, v) addresses the half-open image rectangle [0, W) x [0, H).
// The radar frame is the world frame for every field operation.
class CameraModel {
 public:
  CameraModel(const Mat3& intrinsics, const Mat3& rotation, const Vec3& translation,
              int width, int height, std::vector<double> depth_bins);

  const Mat3& intrinsics() const { return intrinsics_; }
  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }
  int width() const { return width_; }
  int height() const { return height_; }
  const std::vector<double>& depth_bins() const { return depth_bins_; }
  std::size_t num_bins() const { return depth_bins_.size(); }

  // Radar-frame point -> camera frame (R p + T).
  Vec3 to_camera(const Vec3& p) const { return rotation_ * p + translation_; }
  Vec3 to_radar(const Vec3& p_cam) const { return rotation_.transpose() * (p_cam - translation_); }

  // Camera optical center expressed in the radar frame.
  Vec3 center_in_radar() const { return -(rotation_.transpose() * translation_); }

  // Continuous bin index of a metric depth, linearly interpolated over the
  // bin centers and linearly extrapolated outside them.
  double depth_to_bin(double depth) const;

  const Mat3& intrinsics_inverse() const { return intrinsics_inv_; }

  friend bool operator==(const CameraModel& a, const CameraModel& b);

 private:
  Mat3 intrinsics_;
  Mat3 intrinsics_inv_;
  Mat3 rotation_;
  Vec3 translation_;
  int width_;
  int height_;
  std::vector<double> depth_bins_;
};

// (ud, vd, d)^T = K (R p + T). Throws NonPositiveDepth when d <= kMinDepth.
FrustumPoint project(const CameraModel& camera, const Vec3& point);

// p = R^T (d K^{-1} (u, v, 1)^T - T). Throws NonPositiveDepth when d <= 0.
Vec3 unproject(const CameraModel& camera, double u, double v, double d);

// Indices (ascending) of points that project inside [0,W) x [0,H) with positive depth.
std::vector<std::size_t> in_fov(const CameraModel& camera, std::span<const Vec3> points);

bool in_fov(const CameraModel& camera, const Vec3& point);

std::vector<FrustumPoint> frustum_transform(const CameraModel& camera,
                                            std::span<const Vec3> points);
std::vector<Vec3> frustum_inverse(const CameraModel& camera,
                                  std::span<const FrustumPoint> points);

// Moves a radar-frame point by an offset expressed in frustum units (px, px, m).
// Offsets are ordered (du, dv, dd). A zero offset returns the point unchanged.
Vec3 apply_frustum_offset(const CameraModel& camera, const Vec3& point, const Vec3& offset);

}  // namespace rags
