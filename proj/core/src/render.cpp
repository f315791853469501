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

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/LU>

#include "rags/errors.hpp"
#include "rags/splat.hpp"

namespace rags {

namespace {

// A Gaussian projected to the image plane.
struct ImageSplat {
  std::size_t index = 0;
  double u = 0.0;
  double v = 0.0;
  double depth = 0.0;
  Mat2 conic = Mat2::Zero();
  int x0 = 0;
  int x1 = -1;
  int y0 = 0;
  int y1 = -1;

  double mahalanobis(int x, int y) const {
    const double dx = x - u;
    const double dy = y - v;
    return dx * dx * conic(0, 0) + 2.0 * dx * dy * conic(0, 1) + dy * dy * conic(1, 1);
  }
};

// Visible splats sorted front to back (ties by index).
std::vector<ImageSplat> project_splats(const GaussianField& field, const CameraModel& camera,
                                       double cutoff_sigma) {
  const Mat3& k = camera.intrinsics();
  const Mat2 focal = k.topLeftCorner<2, 2>();
  std::vector<ImageSplat> splats;
  for (std::size_t i = 0; i < field.size(); ++i) {
    const Vec3 pc = camera.to_camera(field.positions[i]);
    const Vec3 q = k * pc;
    if (!(q.z() > kMinDepth) || !(pc.z() > kMinDepth)) continue;
    ImageSplat s;
    s.index = i;
    s.depth = q.z();
    s.u = q.x() / q.z();
    s.v = q.y() / q.z();

    const Mat3 cov_cam =
        camera.rotation() * covariance_3d(field.rotations[i], field.scales[i]) * camera.rotation().transpose();
    Eigen::Matrix<double, 2, 3> jac;
    const double z = pc.z();
    jac << 1.0 / z, 0.0, -pc.x() / (z * z), 0.0, 1.0 / z, -pc.y() / (z * z);
    const Eigen::Matrix<double, 2, 3> j = focal * jac;
    const Mat2 cov2 = floor_covariance(j * cov_cam * j.transpose());
    s.conic = cov2.inverse();
    s.conic(1, 0) = s.conic(0, 1);

    const double rx = cutoff_sigma * std::sqrt(cov2(0, 0));
    const double ry = cutoff_sigma * std::sqrt(cov2(1, 1));
    const double fx0 = std::ceil(s.u - rx);
    const double fx1 = std::floor(s.u + rx);
    const double fy0 = std::ceil(s.v - ry);
    const double fy1 = std::floor(s.v + ry);
    if (!(fx1 >= 0.0) || !(fx0 < camera.width()) || !(fy1 >= 0.0) || !(fy0 < camera.height())) continue;
    s.x0 = static_cast<int>(std::max(fx0, 0.0));
    s.x1 = static_cast<int>(std::min(fx1, camera.width() - 1.0));
    s.y0 = static_cast<int>(std::max(fy0, 0.0));
    s.y1 = static_cast<int>(std::min(fy1, camera.height() - 1.0));
    splats.push_back(s);
  }
  std::stable_sort(splats.begin(), splats.end(),
                   [](const ImageSplat& a, const ImageSplat& b) { return a.depth < b.depth; });
  return splats;
}

}  // namespace

DepthRender render_depth(const GaussianField& field, const CameraModel& camera, double cutoff_sigma) {
  const std::size_t h = static_cast<std::size_t>(camera.height());
  const std::size_t w = static_cast<std::size_t>(camera.width());
  DepthRender out{Tensor({h, w}), Tensor({h, w})};
  std::vector<double> trans(h * w, 1.0);
  const double cutoff2 = cutoff_sigma * cutoff_sigma;

  for (const auto& s : project_splats(field, camera, cutoff_sigma)) {
    const double opacity = field.opacities[s.index];
    for (int y = s.y0; y <= s.y1; ++y) {
      for (int x = s.x0; x <= s.x1; ++x) {
        const double m = s.mahalanobis(x, y);
        if (!(m <= cutoff2)) continue;
        const std::size_t px = static_cast<std::size_t>(y) * w + x;
        const double alpha = opacity * std::exp(-0.5 * m);
        const double weight = trans[px] * alpha;
        out.depth[px] += weight * s.depth;
        out.alpha[px] += weight;
        trans[px] *= 1.0 - alpha;
      }
    }
  }
  for (std::size_t px = 0; px < h * w; ++px) {
    if (out.alpha[px] < kMinAccumulatedAlpha) out.depth[px] = 0.0;
  }
  return out;
}

std::vector<double> render_depth_opacity_grad(const GaussianField& field, const CameraModel& camera,
                                              const Tensor& upstream, double cutoff_sigma) {
  const std::size_t h = static_cast<std::size_t>(camera.height());
  const std::size_t w = static_cast<std::size_t>(camera.width());
  if (upstream.rank() != 2 || upstream.dim(0) != h || upstream.dim(1) != w) {
    throw DimensionMismatch("upstream depth gradient must be H x W");
  }
  const double cutoff2 = cutoff_sigma * cutoff_sigma;
  const auto splats = project_splats(field, camera, cutoff_sigma);

  std::vector<double> trans(h * w, 1.0);
  std::vector<double> accumulated(h * w, 0.0);
  for (const auto& s : splats) {
    const double opacity = field.opacities[s.index];
    for (int y = s.y0; y <= s.y1; ++y) {
      for (int x = s.x0; x <= s.x1; ++x) {
        const double m = s.mahalanobis(x, y);
        if (!(m <= cutoff2)) continue;
        const std::size_t px = static_cast<std::size_t>(y) * w + x;
        const double alpha = opacity * std::exp(-0.5 * m);
        accumulated[px] += trans[px] * alpha;
        trans[px] *= 1.0 - alpha;
      }
    }
  }

  // Back to front: `suffix` holds sum_{i>k} T_i alpha_i d_i per pixel.
  std::vector<double> suffix(h * w, 0.0);
  std::vector<double> grad(field.size(), 0.0);
  for (auto it = splats.rbegin(); it != splats.rend(); ++it) {
    const auto& s = *it;
    const double opacity = field.opacities[s.index];
    double g = 0.0;
    for (int y = s.y0; y <= s.y1; ++y) {
      for (int x = s.x0; x <= s.x1; ++x) {
        const double m = s.mahalanobis(x, y);
        if (!(m <= cutoff2)) continue;
        const std::size_t px = static_cast<std::size_t>(y) * w + x;
        const double e = std::exp(-0.5 * m);
        const double alpha = opacity * e;
        const double t_before = trans[px] / (1.0 - alpha);
        if (accumulated[px] >= kMinAccumulatedAlpha) {
          const double d_alpha = t_before * s.depth - suffix[px] / (1.0 - alpha);
          g += upstream[px] * d_alpha * e;
        }
        suffix[px] += t_before * alpha * s.depth;
        trans[px] = t_before;
      }
    }
    grad[s.index] = g;
  }
  return grad;
}

}  // namespace rags
