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

#include "rags/splat.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/LU>

#include "parallel.hpp"
#include "rags/errors.hpp"

namespace rags {

namespace {

int clamp_index(double v, int n) {
  if (!(v > -1.0)) return -1;
  if (!(v < n)) return n;
  return static_cast<int>(v);
}

void check_compatible(const BevGrid& a, const BevGrid& b) {
  if (!(a.geometry() == b.geometry()) || a.channels() != b.channels()) {
    throw DimensionMismatch("BEV grids differ in geometry or channels");
  }
}

}  // namespace

void SplatConfig::validate() const {
  grid.validate();
  if (!(cutoff_sigma > 0.0)) throw InvalidArgument("cutoff_sigma must be positive");
  if (tile_size < 1) throw InvalidArgument("tile_size must be >= 1");
  if (levels < 1) throw InvalidArgument("levels must be >= 1");
}

Mat3 quaternion_to_rotation(const Quat& q) {
  const double n = q.norm();
  if (!(std::abs(n - 1.0) <= 1e-6)) {
    throw NonUnitQuaternion("quaternion norm " + std::to_string(n) + " is not 1");
  }
  const double w = q(0) / n;
  const double x = q(1) / n;
  const double y = q(2) / n;
  const double z = q(3) / n;
  Mat3 r;
  r << 1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y),
      2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x),
      2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y);
  return r;
}

Mat3 covariance_3d(const Quat& rotation, const Vec3& scale) {
  const Mat3 r = quaternion_to_rotation(rotation);
  return r * scale.cwiseProduct(scale).asDiagonal() * r.transpose();
}

Mat2 floor_covariance(const Mat2& cov) {
  const double a = cov(0, 0);
  const double b = 0.5 * (cov(0, 1) + cov(1, 0));
  const double c = cov(1, 1);
  const double mean = 0.5 * (a + c);
  const double disc = std::hypot(0.5 * (a - c), b);
  const double lo = mean - disc;
  Mat2 out;
  if (lo >= kCovarianceFloor) {
    out << a, b, b, c;
    return out;
  }
  const double hi = std::max(mean + disc, kCovarianceFloor);
  if (b == 0.0) {
    out << std::max(a, kCovarianceFloor), 0.0, 0.0, std::max(c, kCovarianceFloor);
    return out;
  }
  Vec2 v1(mean + disc - c, b);
  v1.normalize();
  const Vec2 v2(-v1.y(), v1.x());
  out = hi * v1 * v1.transpose() + kCovarianceFloor * v2 * v2.transpose();
  out(1, 0) = out(0, 1);
  return out;
}

Mat2 bev_covariance(const Quat& rotation, const Vec3& scale) {
  return floor_covariance(covariance_3d(rotation, scale).topLeftCorner<2, 2>());
}

SplatFootprint splat_footprint(const Vec3& position, const Quat& rotation, const Vec3& scale,
                               const SplatConfig& config) {
  const Mat2 cov = bev_covariance(rotation, scale);
  const Mat2 conic = cov.inverse();
  SplatFootprint fp;
  fp.mean = position.head<2>();
  fp.conic_xx = conic(0, 0);
  fp.conic_xy = 0.5 * (conic(0, 1) + conic(1, 0));
  fp.conic_yy = conic(1, 1);

  const auto& g = config.grid;
  const double rx = config.cutoff_sigma * std::sqrt(cov(0, 0));
  const double ry = config.cutoff_sigma * std::sqrt(cov(1, 1));
  // One cell of slack on each side; the per-cell Mahalanobis test decides.
  const double fx0 = std::ceil((fp.mean.x() - rx - g.origin.x()) / g.cell_size - 0.5) - 1.0;
  const double fx1 = std::floor((fp.mean.x() + rx - g.origin.x()) / g.cell_size - 0.5) + 1.0;
  const double fy0 = std::ceil((fp.mean.y() - ry - g.origin.y()) / g.cell_size - 0.5) - 1.0;
  const double fy1 = std::floor((fp.mean.y() + ry - g.origin.y()) / g.cell_size - 0.5) + 1.0;
  fp.ix0 = std::max(clamp_index(fx0, g.nx), 0);
  fp.ix1 = std::min(clamp_index(fx1, g.nx), g.nx - 1);
  fp.iy0 = std::max(clamp_index(fy0, g.ny), 0);
  fp.iy1 = std::min(clamp_index(fy1, g.ny), g.ny - 1);
  if (!std::isfinite(fx0) || !std::isfinite(fx1) || !std::isfinite(fy0) || !std::isfinite(fy1)) {
    fp.ix1 = fp.ix0 - 1;
  }
  return fp;
}

BevGrid rasterize(const GaussianField& field, const SplatConfig& config, RasterStats* stats) {
  config.validate();
  const auto& g = config.grid;
  const int channels = std::max(field.feature_width(), 1);
  BevGrid out(g, channels);
  const std::size_t n = field.size();
  const double cutoff2 = config.cutoff_sigma * config.cutoff_sigma;

  std::vector<SplatFootprint> footprints(n);
  for (std::size_t i = 0; i < n; ++i) {
    footprints[i] = splat_footprint(field.positions[i], field.rotations[i], field.scales[i], config);
  }

  const int ts = config.tile_size;
  const std::size_t tiles_x = static_cast<std::size_t>((g.nx + ts - 1) / ts);
  const std::size_t tiles_y = static_cast<std::size_t>((g.ny + ts - 1) / ts);
  const std::size_t num_tiles = tiles_x * tiles_y;

  // CSR binning; within a tile, Gaussians stay in index order.
  std::vector<std::size_t> offsets(num_tiles + 1, 0);
  for (const auto& fp : footprints) {
    if (fp.empty()) continue;
    for (int tx = fp.ix0 / ts; tx <= fp.ix1 / ts; ++tx) {
      for (int ty = fp.iy0 / ts; ty <= fp.iy1 / ts; ++ty) ++offsets[tx * tiles_y + ty + 1];
    }
  }
  for (std::size_t t = 0; t < num_tiles; ++t) offsets[t + 1] += offsets[t];
  std::vector<std::size_t> bins(offsets.back());
  {
    std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& fp = footprints[i];
      if (fp.empty()) continue;
      for (int tx = fp.ix0 / ts; tx <= fp.ix1 / ts; ++tx) {
        for (int ty = fp.iy0 / ts; ty <= fp.iy1 / ts; ++ty) bins[cursor[tx * tiles_y + ty]++] = i;
      }
    }
  }

  std::vector<std::size_t> pairs(num_tiles, 0);
  std::vector<std::size_t> writes(num_tiles, 0);
  const int feature_width = field.feature_width();
  detail::parallel_for(num_tiles, config.threads, [&](std::size_t t) {
    const int tx = static_cast<int>(t / tiles_y);
    const int ty = static_cast<int>(t % tiles_y);
    const int cx0 = tx * ts;
    const int cx1 = std::min(cx0 + ts, g.nx) - 1;
    const int cy0 = ty * ts;
    const int cy1 = std::min(cy0 + ts, g.ny) - 1;
    std::size_t tile_pairs = 0;
    std::size_t tile_writes = 0;
    for (std::size_t k = offsets[t]; k < offsets[t + 1]; ++k) {
      const std::size_t i = bins[k];
      const auto& fp = footprints[i];
      const double opacity = field.opacities[i];
      const double* feature = field.features.row(static_cast<Eigen::Index>(i)).data();
      const int x0 = std::max(fp.ix0, cx0);
      const int x1 = std::min(fp.ix1, cx1);
      const int y0 = std::max(fp.iy0, cy0);
      const int y1 = std::min(fp.iy1, cy1);
      for (int ix = x0; ix <= x1; ++ix) {
        for (int iy = y0; iy <= y1; ++iy) {
          ++tile_pairs;
          const double m = fp.mahalanobis(g.cell_center(ix, iy));
          if (!(m <= cutoff2)) continue;
          const double w = opacity * std::exp(-0.5 * m);
          double* cell = out.cell(ix, iy);
          for (int c = 0; c < feature_width; ++c) cell[c] += w * feature[c];
          ++tile_writes;
        }
      }
    }
    pairs[t] = tile_pairs;
    writes[t] = tile_writes;
  });

  if (stats != nullptr) {
    stats->tiles_x = tiles_x;
    stats->tiles_y = tiles_y;
    stats->gaussians_per_tile.assign(num_tiles, 0);
    for (std::size_t t = 0; t < num_tiles; ++t) stats->gaussians_per_tile[t] = offsets[t + 1] - offsets[t];
    stats->pairs_evaluated = 0;
    stats->cells_written = 0;
    for (std::size_t t = 0; t < num_tiles; ++t) {
      stats->pairs_evaluated += pairs[t];
      stats->cells_written += writes[t];
    }
  }
  return out;
}

BevGrid rasterize_naive(const GaussianField& field, const SplatConfig& config) {
  config.validate();
  const auto& g = config.grid;
  const int channels = std::max(field.feature_width(), 1);
  BevGrid out(g, channels);
  const double cutoff2 = config.cutoff_sigma * config.cutoff_sigma;
  std::vector<SplatFootprint> footprints;
  footprints.reserve(field.size());
  for (std::size_t i = 0; i < field.size(); ++i) {
    footprints.push_back(splat_footprint(field.positions[i], field.rotations[i], field.scales[i], config));
  }
  const int feature_width = field.feature_width();
  for (int ix = 0; ix < g.nx; ++ix) {
    for (int iy = 0; iy < g.ny; ++iy) {
      double* cell = out.cell(ix, iy);
      const Vec2 center = g.cell_center(ix, iy);
      for (std::size_t i = 0; i < field.size(); ++i) {
        const double m = footprints[i].mahalanobis(center);
        if (!(m <= cutoff2)) continue;
        const double w = field.opacities[i] * std::exp(-0.5 * m);
        const double* feature = field.features.row(static_cast<Eigen::Index>(i)).data();
        for (int c = 0; c < feature_width; ++c) cell[c] += w * feature[c];
      }
    }
  }
  return out;
}

RasterGrads rasterize_backward(const GaussianField& field, const SplatConfig& config,
                               const BevGrid& upstream) {
  config.validate();
  const auto& g = config.grid;
  const int channels = field.feature_width();
  if (!(upstream.geometry() == g) || upstream.channels() != channels) {
    throw DimensionMismatch("upstream gradient does not match the raster");
  }
  const std::size_t n = field.size();
  const double cutoff2 = config.cutoff_sigma * config.cutoff_sigma;
  RasterGrads grads;
  grads.position_xy.assign(n, Vec2::Zero());
  grads.scale.assign(n, Vec3::Zero());
  grads.opacity.assign(n, 0.0);
  grads.features = FeatureMatrix::Zero(static_cast<Eigen::Index>(n), channels);

  detail::parallel_for(n, config.threads, [&](std::size_t i) {
    const SplatFootprint fp = splat_footprint(field.positions[i], field.rotations[i], field.scales[i], config);
    if (fp.empty()) return;
    const Mat3 rot = quaternion_to_rotation(field.rotations[i]);
    const double opacity = field.opacities[i];
    const Eigen::Map<const Eigen::VectorXd> feature(field.features.row(static_cast<Eigen::Index>(i)).data(),
                                                    channels);
    Mat2 conic;
    conic << fp.conic_xx, fp.conic_xy, fp.conic_xy, fp.conic_yy;

    double d_opacity = 0.0;
    Vec2 d_mean = Vec2::Zero();
    Mat2 d_cov = Mat2::Zero();
    Eigen::VectorXd d_feature = Eigen::VectorXd::Zero(channels);
    for (int ix = fp.ix0; ix <= fp.ix1; ++ix) {
      for (int iy = fp.iy0; iy <= fp.iy1; ++iy) {
        const Vec2 center = g.cell_center(ix, iy);
        const double m = fp.mahalanobis(center);
        if (!(m <= cutoff2)) continue;
        const double e = std::exp(-0.5 * m);
        const double w = opacity * e;
        const Eigen::Map<const Eigen::VectorXd> up(upstream.cell(ix, iy), channels);
        const double g_cell = up.dot(feature);
        d_opacity += e * g_cell;
        d_feature += w * up;
        const Vec2 ad = conic * (center - fp.mean);
        d_mean += g_cell * w * ad;
        d_cov += 0.5 * g_cell * w * ad * ad.transpose();
      }
    }
    grads.opacity[i] = d_opacity;
    grads.position_xy[i] = d_mean;
    grads.features.row(static_cast<Eigen::Index>(i)) = d_feature.transpose();
    const Vec3& s = field.scales[i];
    Vec3 d_scale = Vec3::Zero();
    for (int k = 0; k < 3; ++k) {
      double acc = 0.0;
      for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) acc += d_cov(a, b) * rot(a, k) * rot(b, k);
      }
      d_scale(k) = 2.0 * s(k) * acc;
    }
    grads.scale[i] = d_scale;
  });
  return grads;
}

BevGrid fuse_levels(std::span<const BevGrid> levels, const Conv2d& conv) {
  if (levels.empty()) throw DimensionMismatch("fuse_levels needs at least one level");
  const BevGrid& first = levels.front();
  for (const auto& l : levels) check_compatible(first, l);
  const int c = first.channels();
  const int stacked = c * static_cast<int>(levels.size());
  if (conv.in_channels != stacked) {
    throw DimensionMismatch("fuse conv expects " + std::to_string(conv.in_channels) +
                            " input channels, got " + std::to_string(stacked));
  }
  const std::size_t cells = static_cast<std::size_t>(first.nx()) * first.ny();
  std::vector<double> concat(cells * stacked);
  for (std::size_t cell = 0; cell < cells; ++cell) {
    for (std::size_t l = 0; l < levels.size(); ++l) {
      std::copy_n(levels[l].data().data() + cell * c, c, concat.data() + cell * stacked + l * c);
    }
  }
  BevGrid out(first.geometry(), conv.out_channels);
  out.data() = conv.apply(concat, first.nx(), first.ny());
  return out;
}

BevGrid scatter_pillars(const PillarSet& pillars, const BevGeometry& grid) {
  BevGrid raster(grid, std::max(pillars.channels(), 1));
  for (std::size_t p = 0; p < pillars.size(); ++p) {
    const auto [ix, iy] = pillars.coords[p];
    if (ix < 0 || ix >= grid.nx || iy < 0 || iy >= grid.ny) {
      throw OutOfGridPillar("pillar (" + std::to_string(ix) + ", " + std::to_string(iy) +
                            ") lies outside the BEV grid");
    }
    for (int c = 0; c < pillars.channels(); ++c) raster.at(ix, iy, c) = pillars.features(static_cast<Eigen::Index>(p), c);
  }
  return raster;
}

BevGrid cross_modal_fuse(const BevGrid& f_gs, const PillarSet& pillars, const Conv2d& conv) {
  const int c_gs = f_gs.channels();
  const int c_p = conv.in_channels - c_gs;
  if (c_p < 1 || (pillars.size() > 0 && pillars.channels() != c_p)) {
    throw DimensionMismatch("cross-modal conv input channels do not match F_gs + pillar channels");
  }
  const BevGrid radar = scatter_pillars(pillars, f_gs.geometry());
  const std::size_t cells = static_cast<std::size_t>(f_gs.nx()) * f_gs.ny();
  const int stacked = c_gs + c_p;
  std::vector<double> concat(cells * stacked, 0.0);
  for (std::size_t cell = 0; cell < cells; ++cell) {
    std::copy_n(f_gs.data().data() + cell * c_gs, c_gs, concat.data() + cell * stacked);
    if (pillars.size() > 0) {
      std::copy_n(radar.data().data() + cell * c_p, c_p, concat.data() + cell * stacked + c_gs);
    }
  }
  BevGrid out(f_gs.geometry(), conv.out_channels);
  out.data() = conv.apply(concat, f_gs.nx(), f_gs.ny());
  return out;
}

BevGrid bev_seg_logits(const BevGrid& f_bev, const Conv2d& head) {
  if (head.kernel != 1 || head.out_channels != 1 || head.in_channels != f_bev.channels()) {
    throw DimensionMismatch("segmentation head must be a 1x1 conv from C to 1 channel");
  }
  BevGrid out(f_bev.geometry(), 1);
  out.data() = head.apply(f_bev.data(), f_bev.nx(), f_bev.ny());
  return out;
}

}  // namespace rags
