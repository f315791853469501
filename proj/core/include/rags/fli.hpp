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
#include <cstdint>
#include <span>
#include <vector>

#include "rags/camera.hpp"
#include "rags/tensor.hpp"
#include "rags/types.hpp"

namespace rags {

struct AxisRange {
  double min = 0.0;
  double max = 0.0;

  double span() const { return max - min; }
  friend bool operator==(const AxisRange&, const AxisRange&) = default;
};

// Axis-aligned region of the radar frame.
struct RangeBox {
  AxisRange x{0.0, 12.8};
  AxisRange y{-6.4, 6.4};
  AxisRange z{-0.96, 1.6};

  Vec3 centroid() const {
    return {0.5 * (x.min + x.max), 0.5 * (y.min + y.max), 0.5 * (z.min + z.max)};
  }
  Vec3 clamp(const Vec3& p) const;
  bool contains(const Vec3& p) const;
  friend bool operator==(const RangeBox&, const RangeBox&) = default;
};

// Budget for Gaussian initialization.
struct InitConfig {
  std::size_t n_total = 512;
  std::size_t top_k = 128;
  std::size_t n_sample = 256;
  double voxel_size = 0.32;
  RangeBox range;

  // top_k = N/4, n_sample = N/2, remainder left to radar points.
  static InitConfig for_budget(std::size_t n_total, const RangeBox& range = {},
                               double voxel_size = 0.32);
  void validate() const;
};

// Foreground pixel: u = column, v = row, d = metric depth.
struct Pixel {
  double u = 0.0;
  double v = 0.0;
  double d = 0.0;
};

// The k highest logits (ties by ascending row-major index), paired with depth.
std::vector<Pixel> select_foreground(const Tensor& logits, const Tensor& depth, std::size_t k);

std::vector<Vec3> unproject_foreground(const CameraModel& camera, std::span<const Pixel> pixels);

// Voxel centers over config.range that fall inside the camera FoV.
std::vector<Vec3> frustum_candidates(const CameraModel& camera, const InitConfig& config);

// Index of the point closest to `target` (lowest index wins ties).
std::size_t nearest_index(std::span<const Vec3> points, const Vec3& target);

// Greedy furthest-point sampling from `start`; ties pick the lowest index.
// Returns min(count, points.size()) indices in selection order.
std::vector<std::size_t> furthest_point_sample(std::span<const Vec3> points, std::size_t count,
                                               std::size_t start);

// Continues furthest-point sampling over `candidates` given already placed
// points; when `existing` is empty the first pick is the candidate nearest
// `anchor`. Candidates may repeat once every candidate has distance 0.
std::vector<std::size_t> extend_furthest(std::span<const Vec3> candidates,
                                         std::span<const Vec3> existing, std::size_t count,
                                         const Vec3& anchor);

// Furthest sampling over in-FoV candidates starting nearest the range centroid.
// The seed is accepted for interface stability; the procedure is deterministic.
// Throws EmptyFrustum when no candidate is visible.
std::vector<Vec3> sample_frustum(const CameraModel& camera, const InitConfig& config,
                                 std::uint64_t seed);

// Concatenates (unprojected, sampled, radar) and reconciles the count to
// config.n_total: overflow drops sampled points from the tail first, then
// radar points, then unprojected points; underflow appends furthest samples
// over `candidates`. Every output is clamped into config.range.
std::vector<Vec3> gather_positions(std::span<const Vec3> p_unproj, std::span<const Vec3> p_sample,
                                   std::span<const Vec3> p_radar, std::span<const Vec3> candidates,
                                   const InitConfig& config);

inline constexpr double kInitOpacity = 0.1;

// Identity rotations, isotropic half-voxel scales, opacity 0.1 and seeded features.
GaussianField init_field(std::span<const Vec3> positions, int feature_width, std::uint64_t seed,
                         double voxel_size = 0.32);

}  // namespace rags
