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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/LU>

#include "rags/camera.hpp"
#include "rags/types.hpp"

namespace fixture {

inline rags::Mat3 simple_intrinsics() {
  rags::Mat3 k;
  k << 100, 0, 64, 0, 100, 32, 0, 0, 1;
  return k;
}

// Identity extrinsics, 128 x 64 image.
inline rags::CameraModel simple_camera(std::vector<double> bins = {1, 2, 4, 8, 16, 32}) {
  return rags::CameraModel(simple_intrinsics(), rags::Mat3::Identity(), rags::Vec3::Zero(), 128, 64,
                           std::move(bins));
}

inline rags::Mat3 random_rotation(std::mt19937_64& gen) {
  std::normal_distribution<double> n(0.0, 1.0);
  double w = n(gen), x = n(gen), y = n(gen), z = n(gen);
  const double s = std::sqrt(w * w + x * x + y * y + z * z);
  w /= s;
  x /= s;
  y /= s;
  z /= s;
  rags::Mat3 r;
  r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y), 2 * (x * y + w * z),
      1 - 2 * (x * x + z * z), 2 * (y * z - w * x), 2 * (x * z - w * y), 2 * (y * z + w * x),
      1 - 2 * (x * x + y * y);
  // Re-orthonormalize so the camera's 1e-9 check always holds.
  for (int it = 0; it < 3; ++it) r = 0.5 * (r + r.transpose().inverse());
  return r;
}

inline rags::CameraModel random_camera(std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  rags::Mat3 k;
  k << 50 + 200 * u(gen), 0.0, 30 + 40 * u(gen), 0.0, 50 + 200 * u(gen), 20 + 30 * u(gen), 0, 0, 1;
  const rags::Vec3 t(4 * u(gen) - 2, 4 * u(gen) - 2, 4 * u(gen) - 2);
  return rags::CameraModel(k, random_rotation(gen), t, 96, 64, {1, 2, 4, 8});
}

inline rags::Quat random_quat(std::mt19937_64& gen) {
  std::normal_distribution<double> n(0.0, 1.0);
  rags::Quat q(n(gen), n(gen), n(gen), n(gen));
  return q / q.norm();
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = a.size() == b.size() ? 0.0 : INFINITY;
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double max_abs_diff(const rags::FeatureMatrix& a, const rags::FeatureMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return INFINITY;
  return a.size() == 0 ? 0.0 : (a - b).cwiseAbs().maxCoeff();
}

inline rags::FeatureVolume random_volume(std::size_t h, std::size_t w, std::size_t d, std::size_t c,
                                         std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  rags::FeatureVolume fv{rags::Tensor({h, w, c}), rags::Tensor({h, w, d}), rags::Tensor({h, w})};
  for (auto& v : fv.feature_map.storage()) v = 2.0 * u(gen) - 1.0;
  for (std::size_t px = 0; px < h * w; ++px) {
    double s = 0.0;
    for (std::size_t k = 0; k < d; ++k) s += fv.depth_prob[px * d + k] = u(gen);
    for (std::size_t k = 0; k < d; ++k) fv.depth_prob[px * d + k] /= s;
  }
  return fv;
}

}  // namespace fixture
