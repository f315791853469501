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

#include "rags/fli.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "rags/errors.hpp"
#include "rags/nn.hpp"

namespace rags {

namespace {

std::size_t cells_along(const AxisRange& r, double voxel) {
  const double n = std::floor(r.span() / voxel + 1e-9);
  return n > 0.0 ? static_cast<std::size_t>(n) : 0;
}

// argmax over min_dist; entries < 0 are taken. Returns npos when all are taken.
std::size_t argmax_free(const std::vector<double>& min_dist) {
  std::size_t best = std::numeric_limits<std::size_t>::max();
  double best_d = -1.0;
  for (std::size_t i = 0; i < min_dist.size(); ++i) {
    if (min_dist[i] > best_d) {
      best_d = min_dist[i];
      best = i;
    }
  }
  return best;
}

void relax(std::span<const Vec3> points, const Vec3& chosen, std::vector<double>& min_dist) {
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (min_dist[i] < 0.0) continue;
    min_dist[i] = std::min(min_dist[i], (points[i] - chosen).squaredNorm());
  }
}

}  // namespace

Vec3 RangeBox::clamp(const Vec3& p) const {
  return {std::clamp(p.x(), x.min, x.max), std::clamp(p.y(), y.min, y.max),
          std::clamp(p.z(), z.min, z.max)};
}

bool RangeBox::contains(const Vec3& p) const {
  return p.x() >= x.min && p.x() <= x.max && p.y() >= y.min && p.y() <= y.max && p.z() >= z.min &&
         p.z() <= z.max;
}

InitConfig InitConfig::for_budget(std::size_t n_total, const RangeBox& range, double voxel_size) {
  InitConfig c;
  c.n_total = n_total;
  c.top_k = n_total / 4;
  c.n_sample = n_total / 2;
  c.voxel_size = voxel_size;
  c.range = range;
  return c;
}

void InitConfig::validate() const {
  if (n_total == 0) throw InvalidArgument("n_total must be positive");
  if (!(voxel_size > 0.0)) throw InvalidArgument("voxel_size must be positive");
  if (!(range.x.max > range.x.min && range.y.max > range.y.min && range.z.max > range.z.min)) {
    throw InvalidArgument("init range must have positive extent on every axis");
  }
  if (top_k + n_sample > n_total) throw InvalidArgument("top_k + n_sample exceeds n_total");
}

std::vector<Pixel> select_foreground(const Tensor& logits, const Tensor& depth, std::size_t k) {
  if (logits.rank() != 2 || logits.shape() != depth.shape()) {
    throw DimensionMismatch("logits and depth must both be H x W");
  }
  const std::size_t w = logits.dim(1);
  const std::size_t total = logits.size();
  k = std::min(k, total);
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (logits[a] != logits[b]) return logits[a] > logits[b];
                      return a < b;
                    });
  std::vector<Pixel> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t idx = order[i];
    out.push_back({static_cast<double>(idx % w), static_cast<double>(idx / w), depth[idx]});
  }
  return out;
}

std::vector<Vec3> unproject_foreground(const CameraModel& camera, std::span<const Pixel> pixels) {
  std::vector<Vec3> out;
  out.reserve(pixels.size());
  for (const auto& px : pixels) out.push_back(unproject(camera, px.u, px.v, px.d));
  return out;
}

std::vector<Vec3> frustum_candidates(const CameraModel& camera, const InitConfig& config) {
  const double vs = config.voxel_size;
  const auto& r = config.range;
  const std::size_t nx = cells_along(r.x, vs);
  const std::size_t ny = cells_along(r.y, vs);
  const std::size_t nz = cells_along(r.z, vs);
  std::vector<Vec3> out;
  for (std::size_t ix = 0; ix < nx; ++ix) {
    for (std::size_t iy = 0; iy < ny; ++iy) {
      for (std::size_t iz = 0; iz < nz; ++iz) {
        const Vec3 c(r.x.min + (ix + 0.5) * vs, r.y.min + (iy + 0.5) * vs, r.z.min + (iz + 0.5) * vs);
        if (in_fov(camera, c)) out.push_back(c);
      }
    }
  }
  return out;
}

std::size_t nearest_index(std::span<const Vec3> points, const Vec3& target) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double d = (points[i] - target).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

std::vector<std::size_t> furthest_point_sample(std::span<const Vec3> points, std::size_t count,
                                               std::size_t start) {
  count = std::min(count, points.size());
  std::vector<std::size_t> chosen;
  if (count == 0) return chosen;
  if (start >= points.size()) throw InvalidArgument("FPS start index out of range");
  chosen.reserve(count);
  std::vector<double> min_dist(points.size(), std::numeric_limits<double>::infinity());
  std::size_t next = start;
  while (true) {
    chosen.push_back(next);
    min_dist[next] = -1.0;
    if (chosen.size() == count) break;
    relax(points, points[next], min_dist);
    next = argmax_free(min_dist);
  }
  return chosen;
}

std::vector<std::size_t> extend_furthest(std::span<const Vec3> candidates,
                                         std::span<const Vec3> existing, std::size_t count,
                                         const Vec3& anchor) {
  std::vector<std::size_t> chosen;
  if (count == 0) return chosen;
  if (candidates.empty()) throw EmptyFrustum("no candidates available for furthest sampling");
  chosen.reserve(count);
  std::vector<double> min_dist(candidates.size(), std::numeric_limits<double>::infinity());
  for (const auto& p : existing) relax(candidates, p, min_dist);

  std::size_t next = existing.empty() ? nearest_index(candidates, anchor) : argmax_free(min_dist);
  while (true) {
    chosen.push_back(next);
    min_dist[next] = -1.0;
    if (chosen.size() == count) break;
    relax(candidates, candidates[next], min_dist);
    next = argmax_free(min_dist);
    if (min_dist[next] < 0.0) {
      // Every candidate is taken; start another sweep that may repeat points.
      std::fill(min_dist.begin(), min_dist.end(), 0.0);
      next = 0;
    }
  }
  return chosen;
}

std::vector<Vec3> sample_frustum(const CameraModel& camera, const InitConfig& config,
                                 std::uint64_t /*seed*/) {
  const std::vector<Vec3> candidates = frustum_candidates(camera, config);
  if (candidates.empty()) throw EmptyFrustum("no voxel center of the init range is in the camera FoV");
  const std::size_t start = nearest_index(candidates, config.range.centroid());
  std::vector<Vec3> out;
  for (std::size_t idx : furthest_point_sample(candidates, config.n_sample, start)) {
    out.push_back(candidates[idx]);
  }
  return out;
}

std::vector<Vec3> gather_positions(std::span<const Vec3> p_unproj, std::span<const Vec3> p_sample,
                                   std::span<const Vec3> p_radar, std::span<const Vec3> candidates,
                                   const InitConfig& config) {
  const std::size_t n = config.n_total;
  if (n == 0) throw InvalidArgument("n_total must be positive");
  const std::size_t total = p_unproj.size() + p_sample.size() + p_radar.size();

  std::size_t keep_u = p_unproj.size();
  std::size_t keep_s = p_sample.size();
  std::size_t keep_r = p_radar.size();
  if (total > n) {
    std::size_t excess = total - n;
    const std::size_t drop_s = std::min(excess, keep_s);
    keep_s -= drop_s;
    excess -= drop_s;
    const std::size_t drop_r = std::min(excess, keep_r);
    keep_r -= drop_r;
    excess -= drop_r;
    keep_u -= excess;
  }

  std::vector<Vec3> out;
  out.reserve(n);
  out.insert(out.end(), p_unproj.begin(), p_unproj.begin() + static_cast<std::ptrdiff_t>(keep_u));
  out.insert(out.end(), p_sample.begin(), p_sample.begin() + static_cast<std::ptrdiff_t>(keep_s));
  out.insert(out.end(), p_radar.begin(), p_radar.begin() + static_cast<std::ptrdiff_t>(keep_r));
  for (auto& p : out) p = config.range.clamp(p);

  if (out.size() < n) {
    const std::size_t deficit = n - out.size();
    const auto extra = extend_furthest(candidates, out, deficit, config.range.centroid());
    for (std::size_t idx : extra) out.push_back(config.range.clamp(candidates[idx]));
  }
  return out;
}

GaussianField init_field(std::span<const Vec3> positions, int feature_width, std::uint64_t seed,
                         double voxel_size) {
  if (feature_width <= 0) throw InvalidArgument("feature width must be positive");
  const std::size_t n = positions.size();
  GaussianField field;
  field.positions.assign(positions.begin(), positions.end());
  for (const auto& p : field.positions) {
    if (!p.allFinite()) throw InvalidArgument("init positions must be finite");
  }
  field.rotations.assign(n, identity_quat());
  field.scales.assign(n, Vec3::Constant(0.5 * voxel_size));
  field.opacities.assign(n, kInitOpacity);
  field.features = seeded_uniform(static_cast<int>(n), feature_width, feature_width, seed, 0);
  return field;
}

}  // namespace rags
