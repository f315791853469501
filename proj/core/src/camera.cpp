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

#include "rags/camera.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/LU>

#include "rags/errors.hpp"

namespace rags {

CameraModel::CameraModel(const Mat3& intrinsics, const Mat3& rotation, const Vec3& translation,
                         int width, int height, std::vector<double> depth_bins)
    : intrinsics_(intrinsics),
      rotation_(rotation),
      translation_(translation),
      width_(width),
      height_(height),
      depth_bins_(std::move(depth_bins)) {
  if (!intrinsics_.allFinite() || !rotation_.allFinite() || !translation_.allFinite()) {
    throw InvalidArgument("camera parameters must be finite");
  }
  if (intrinsics_(2, 2) != 1.0) throw InvalidArgument("intrinsics K[2][2] must equal 1");
  if (!(intrinsics_(0, 0) > 0.0) || !(intrinsics_(1, 1) > 0.0)) {
    throw InvalidArgument("focal lengths K[0][0], K[1][1] must be positive");
  }
  const double ortho_err = (rotation_ * rotation_.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (ortho_err > 1e-9 || std::abs(rotation_.determinant() - 1.0) > 1e-9) {
    throw InvalidArgument("extrinsic rotation must be orthonormal with determinant +1");
  }
  if (width_ <= 0 || height_ <= 0) throw InvalidArgument("image extent must be positive");
  if (depth_bins_.empty()) throw InvalidArgument("depth_bins must not be empty");
  for (std::size_t i = 0; i < depth_bins_.size(); ++i) {
    if (!(depth_bins_[i] > 0.0) || !std::isfinite(depth_bins_[i])) {
      throw InvalidArgument("depth bins must be positive and finite");
    }
    if (i > 0 && !(depth_bins_[i] > depth_bins_[i - 1])) {
      throw InvalidArgument("depth bins must be strictly increasing");
    }
  }
  intrinsics_inv_ = intrinsics_.inverse();
}

double CameraModel::depth_to_bin(double depth) const {
  const auto& b = depth_bins_;
  if (b.size() == 1) return depth - b.front();
  if (depth <= b.front()) return (depth - b[0]) / (b[1] - b[0]);
  if (depth >= b.back()) {
    const std::size_t n = b.size();
    return static_cast<double>(n - 1) + (depth - b[n - 1]) / (b[n - 1] - b[n - 2]);
  }
  const auto it = std::upper_bound(b.begin(), b.end(), depth);
  const std::size_t hi = static_cast<std::size_t>(it - b.begin());
  const std::size_t lo = hi - 1;
  return static_cast<double>(lo) + (depth - b[lo]) / (b[hi] - b[lo]);
}

bool operator==(const CameraModel& a, const CameraModel& b) {
  return a.intrinsics_ == b.intrinsics_ && a.rotation_ == b.rotation_ &&
         a.translation_ == b.translation_ && a.width_ == b.width_ && a.height_ == b.height_ &&
         a.depth_bins_ == b.depth_bins_;
}

FrustumPoint project(const CameraModel& camera, const Vec3& point) {
  const Vec3 q = camera.intrinsics() * camera.to_camera(point);
  const double d = q.z();
  if (!(d > kMinDepth)) {
    throw NonPositiveDepth("point has camera depth " + std::to_string(d) + " <= 1e-6");
  }
  return {q.x() / d, q.y() / d, d};
}

Vec3 unproject(const CameraModel& camera, double u, double v, double d) {
  if (!(d > 0.0)) throw NonPositiveDepth("unproject requires positive depth");
  const Vec3 p_cam = d * (camera.intrinsics_inverse() * Vec3(u, v, 1.0));
  return camera.to_radar(p_cam);
}

bool in_fov(const CameraModel& camera, const Vec3& point) {
  const Vec3 q = camera.intrinsics() * camera.to_camera(point);
  const double d = q.z();
  if (!(d > kMinDepth)) return false;
  const double u = q.x() / d;
  const double v = q.y() / d;
  return u >= 0.0 && u < camera.width() && v >= 0.0 && v < camera.height();
}

std::vector<std::size_t> in_fov(const CameraModel& camera, std::span<const Vec3> points) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (in_fov(camera, points[i])) out.push_back(i);
  }
  return out;
}

std::vector<FrustumPoint> frustum_transform(const CameraModel& camera,
                                            std::span<const Vec3> points) {
  std::vector<FrustumPoint> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(project(camera, p));
  return out;
}

std::vector<Vec3> frustum_inverse(const CameraModel& camera,
                                  std::span<const FrustumPoint> points) {
  std::vector<Vec3> out;
  out.reserve(points.size());
  for (const auto& f : points) out.push_back(unproject(camera, f.u, f.v, f.d));
  return out;
}

Vec3 apply_frustum_offset(const CameraModel& camera, const Vec3& point, const Vec3& offset) {
  if (offset.x() == 0.0 && offset.y() == 0.0 && offset.z() == 0.0) return point;
  const FrustumPoint f = project(camera, point);
  return unproject(camera, f.u + offset.x(), f.v + offset.y(), f.d + offset.z());
}

}  // namespace rags
