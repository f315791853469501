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

#include "rags/types.hpp"

#include <cmath>
#include <string>

#include "rags/errors.hpp"

namespace rags {

Eigen::MatrixXd GaussianField::explicit_block() const {
  Eigen::MatrixXd block(static_cast<Eigen::Index>(size()), kExplicitWidth);
  for (std::size_t i = 0; i < size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    block.block<1, 3>(r, 0) = positions[i].transpose();
    block.block<1, 4>(r, 3) = rotations[i].transpose();
    block.block<1, 3>(r, 7) = scales[i].transpose();
    block(r, 10) = opacities[i];
  }
  return block;
}

void GaussianField::validate() const {
  const std::size_t n = size();
  if (rotations.size() != n || scales.size() != n || opacities.size() != n ||
      static_cast<std::size_t>(features.rows()) != n) {
    throw InvalidArgument("gaussian field attribute counts differ");
  }
  for (std::size_t i = 0; i < n; ++i) {
    const std::string at = " at gaussian " + std::to_string(i);
    if (!positions[i].allFinite()) throw InvalidArgument("non-finite position" + at);
    if (std::abs(rotations[i].norm() - 1.0) > 1e-6) throw InvalidArgument("non-unit quaternion" + at);
    if (!(scales[i].minCoeff() > 0.0) || !scales[i].allFinite()) {
      throw InvalidArgument("non-positive scale" + at);
    }
    if (!(opacities[i] > 0.0 && opacities[i] < 1.0)) throw InvalidArgument("opacity outside (0,1)" + at);
  }
  if (!features.allFinite()) throw InvalidArgument("non-finite gaussian features");
}

bool operator==(const GaussianField& a, const GaussianField& b) {
  return a.positions == b.positions && a.rotations == b.rotations && a.scales == b.scales &&
         a.opacities == b.opacities && a.features.rows() == b.features.rows() &&
         a.features.cols() == b.features.cols() && a.features == b.features;
}

Tensor field_to_tensor(const GaussianField& field) {
  const std::size_t n = field.size();
  const std::size_t c = static_cast<std::size_t>(field.feature_width());
  const std::size_t width = kExplicitWidth + c;
  Tensor out({n, width});
  const Eigen::MatrixXd block = field.explicit_block();
  for (std::size_t i = 0; i < n; ++i) {
    for (int j = 0; j < kExplicitWidth; ++j) out(i, j) = block(static_cast<Eigen::Index>(i), j);
    for (std::size_t j = 0; j < c; ++j) {
      out(i, kExplicitWidth + j) = field.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  return out;
}

GaussianField field_from_tensor(const Tensor& packed) {
  if (packed.rank() != 2 || packed.dim(1) < static_cast<std::size_t>(kExplicitWidth)) {
    throw DimensionMismatch("packed gaussian field must be N x (11 + C), got " + packed.shape_string());
  }
  const std::size_t n = packed.dim(0);
  const std::size_t c = packed.dim(1) - kExplicitWidth;
  GaussianField field;
  field.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(c));
  for (std::size_t i = 0; i < n; ++i) {
    field.positions.emplace_back(packed(i, 0), packed(i, 1), packed(i, 2));
    field.rotations.emplace_back(packed(i, 3), packed(i, 4), packed(i, 5), packed(i, 6));
    field.scales.emplace_back(packed(i, 7), packed(i, 8), packed(i, 9));
    field.opacities.push_back(packed(i, 10));
    for (std::size_t j = 0; j < c; ++j) {
      field.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = packed(i, kExplicitWidth + j);
    }
  }
  return field;
}

void FeatureVolume::validate() const {
  if (feature_map.rank() != 3 || depth_prob.rank() != 3 || sparse_depth.rank() != 2) {
    throw DimensionMismatch("feature volume expects ranks (3, 3, 2)");
  }
  const std::size_t h = feature_map.dim(0);
  const std::size_t w = feature_map.dim(1);
  if (depth_prob.dim(0) != h || depth_prob.dim(1) != w || sparse_depth.dim(0) != h ||
      sparse_depth.dim(1) != w) {
    throw DimensionMismatch("feature volume spatial dimensions disagree");
  }
  const std::size_t d = depth_prob.dim(2);
  for (std::size_t px = 0; px < h * w; ++px) {
    double sum = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double p = depth_prob[px * d + k];
      if (!(p >= 0.0)) throw UnnormalizedDistribution("negative depth probability");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-5) {
      throw UnnormalizedDistribution("depth distribution at pixel " + std::to_string(px) +
                                     " sums to " + std::to_string(sum));
    }
  }
}

std::vector<Vec3> RadarCloud::positions() const {
  std::vector<Vec3> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(p.position());
  return out;
}

bool RadarCloud::all_finite() const {
  for (const auto& p : points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z) ||
        !std::isfinite(p.rcs) || !std::isfinite(p.velocity)) {
      return false;
    }
  }
  return true;
}

bool BevGeometry::cell_of(double x, double y, int& ix, int& iy) const {
  const double fx = std::floor((x - origin.x()) / cell_size);
  const double fy = std::floor((y - origin.y()) / cell_size);
  if (!(fx >= 0.0 && fx < nx && fy >= 0.0 && fy < ny)) return false;
  ix = static_cast<int>(fx);
  iy = static_cast<int>(fy);
  return true;
}

void BevGeometry::validate() const {
  if (!(cell_size > 0.0)) throw InvalidArgument("BEV cell_size must be positive");
  if (nx <= 0 || ny <= 0) throw InvalidArgument("BEV dims must be positive");
}

BevGrid::BevGrid(const BevGeometry& geometry, int channels)
    : geometry_(geometry),
      channels_(channels),
      data_(static_cast<std::size_t>(geometry.nx) * geometry.ny * channels, 0.0) {
  geometry_.validate();
  if (channels <= 0) throw InvalidArgument("BEV channel count must be positive");
}

bool BevGrid::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

Tensor BevGrid::to_tensor() const {
  return Tensor({static_cast<std::size_t>(nx()), static_cast<std::size_t>(ny()),
                 static_cast<std::size_t>(channels_)},
                data_);
}

}  // namespace rags
