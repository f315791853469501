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

#include "rags/ima.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "rags/errors.hpp"
#include "rags/rng.hpp"

namespace rags {

namespace {

// Refinement never pushes a Gaussian closer to the camera than this (m).
constexpr double kRefineMinDepth = 0.1;

}  // namespace

PillarSet pillarize(const RadarCloud& radar, const BevGeometry& grid, int channels,
                    std::uint64_t seed) {
  if (channels < 2) throw InvalidArgument("pillar channels must be >= 2");
  struct Stats {
    Vec3 offset_sum = Vec3::Zero();
    double max_rcs = -std::numeric_limits<double>::infinity();
    double velocity_sum = 0.0;
    int count = 0;
  };
  std::map<std::array<int, 2>, Stats> cells;
  for (const auto& p : radar.points) {
    int ix = 0;
    int iy = 0;
    if (!grid.cell_of(p.x, p.y, ix, iy)) continue;
    const Vec2 c = grid.cell_center(ix, iy);
    auto& s = cells[{ix, iy}];
    s.offset_sum += Vec3(p.x - c.x(), p.y - c.y(), p.z);
    s.max_rcs = std::max(s.max_rcs, p.rcs);
    s.velocity_sum += p.velocity;
    ++s.count;
  }

  const int geo_channels = channels / 2;
  const int rv_channels = channels - geo_channels;
  const Eigen::MatrixXd geo_w = seeded_uniform(geo_channels, 3, 3, seed, 0);
  const Eigen::VectorXd geo_b = seeded_uniform(geo_channels, 1, 3, seed, 1).col(0);
  const Eigen::MatrixXd rv_w = seeded_uniform(rv_channels, 2, 2, seed, 2);
  const Eigen::VectorXd rv_b = seeded_uniform(rv_channels, 1, 2, seed, 3).col(0);

  PillarSet out;
  out.features.resize(static_cast<Eigen::Index>(cells.size()), channels);
  Eigen::Index row = 0;
  for (const auto& [coord, s] : cells) {
    out.coords.push_back(coord);
    const Vec3 mean = s.offset_sum / s.count;
    const Vec3 geo(mean.x() / grid.cell_size, mean.y() / grid.cell_size, mean.z());
    const Eigen::Vector2d rv(s.max_rcs / 10.0, (s.velocity_sum / s.count) / 5.0);
    out.features.row(row).head(geo_channels) = (geo_w * geo + geo_b).transpose();
    out.features.row(row).tail(rv_channels) = (rv_w * rv + rv_b).transpose();
    ++row;
  }
  return out;
}

std::optional<VoxelCoord> VoxelGridSpec::voxel_of(const Vec3& p) const {
  const Vec3 q = (p - origin) / voxel_size;
  const double fx = std::floor(q.x());
  const double fy = std::floor(q.y());
  const double fz = std::floor(q.z());
  if (!(fx >= 0.0 && fx < nx && fy >= 0.0 && fy < ny && fz >= 0.0 && fz < nz)) return std::nullopt;
  return VoxelCoord{static_cast<int>(fx), static_cast<int>(fy), static_cast<int>(fz)};
}

SparseVoxelGrid::SparseVoxelGrid(const std::array<int, 3>& dims, int channels)
    : dims_(dims), channels_(channels) {
  if (dims[0] <= 0 || dims[1] <= 0 || dims[2] <= 0) throw InvalidArgument("voxel dims must be positive");
  if (channels <= 0) throw InvalidArgument("voxel channels must be positive");
}

std::size_t SparseVoxelGrid::insert(const VoxelCoord& coord, std::span<const double> feature) {
  if (coord[0] < 0 || coord[0] >= dims_[0] || coord[1] < 0 || coord[1] >= dims_[1] || coord[2] < 0 ||
      coord[2] >= dims_[2]) {
    throw InvalidArgument("voxel coordinate out of bounds");
  }
  if (feature.size() != static_cast<std::size_t>(channels_)) {
    throw DimensionMismatch("voxel feature width mismatch");
  }
  const auto [it, inserted] = index_.try_emplace(key(coord), coords_.size());
  if (inserted) {
    coords_.push_back(coord);
    values_.insert(values_.end(), feature.begin(), feature.end());
  } else {
    double* dst = values_.data() + it->second * channels_;
    for (int c = 0; c < channels_; ++c) dst[c] += feature[static_cast<std::size_t>(c)];
  }
  return it->second;
}

std::optional<std::size_t> SparseVoxelGrid::find(const VoxelCoord& coord) const {
  if (coord[0] < 0 || coord[0] >= dims_[0] || coord[1] < 0 || coord[1] >= dims_[1] || coord[2] < 0 ||
      coord[2] >= dims_[2]) {
    return std::nullopt;
  }
  const auto it = index_.find(key(coord));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

SparseVoxelGrid replicate_pillars(const PillarSet& pillars, int z_levels, int nx, int ny) {
  if (z_levels < 1) throw InvalidArgument("z_levels must be >= 1");
  const int channels = std::max(pillars.channels(), 1);
  SparseVoxelGrid grid({nx, ny, z_levels}, channels);
  for (std::size_t g = 0; g < pillars.size(); ++g) {
    const auto row = pillars.features.row(static_cast<Eigen::Index>(g));
    const std::vector<double> feature(row.data(), row.data() + row.size());
    for (int z = 0; z < z_levels; ++z) {
      grid.insert({pillars.coords[g][0], pillars.coords[g][1], z}, feature);
    }
  }
  return grid;
}

VolumeView::VolumeView(const FeatureVolume& fv)
    : fv_(&fv),
      h_(static_cast<int>(fv.height())),
      w_(static_cast<int>(fv.width())),
      d_(static_cast<int>(fv.bins())),
      c_(static_cast<int>(fv.channels())) {
  fv.validate();
}

void VolumeView::accumulate(int h, int w, int d, double weight, double* acc) const {
  const std::size_t px = static_cast<std::size_t>(h) * w_ + w;
  const double scale = weight * fv_->depth_prob[px * d_ + d];
  const double* f = fv_->feature_map.data().data() + px * c_;
  for (int c = 0; c < c_; ++c) acc[c] += scale * f[c];
}

VolumeView build_volume(const FeatureVolume& fv) { return VolumeView(fv); }

Eigen::VectorXd trilinear(const VolumeView& volume, double u, double v, double b) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(volume.channels());
  if (!std::isfinite(u) || !std::isfinite(v) || !std::isfinite(b)) return out;
  const double u0 = std::floor(u);
  const double v0 = std::floor(v);
  const double b0 = std::floor(b);
  const double fu = u - u0;
  const double fv = v - v0;
  const double fb = b - b0;
  for (int i = 0; i < 2; ++i) {
    const double wu = i == 0 ? 1.0 - fu : fu;
    const double cu = u0 + i;
    if (wu == 0.0 || cu < 0.0 || cu >= volume.width()) continue;
    for (int j = 0; j < 2; ++j) {
      const double wv = j == 0 ? 1.0 - fv : fv;
      const double cv = v0 + j;
      if (wv == 0.0 || cv < 0.0 || cv >= volume.height()) continue;
      for (int k = 0; k < 2; ++k) {
        const double wb = k == 0 ? 1.0 - fb : fb;
        const double cb = b0 + k;
        if (wb == 0.0 || cb < 0.0 || cb >= volume.bins()) continue;
        volume.accumulate(static_cast<int>(cv), static_cast<int>(cu), static_cast<int>(cb),
                          wu * wv * wb, out.data());
      }
    }
  }
  return out;
}

void ImaConfig::validate() const {
  if (num_iterations < 1) throw InvalidArgument("IMA needs num_iterations >= 1");
  if (num_offsets < 1) throw InvalidArgument("IMA needs num_offsets >= 1");
  if (!(offset_scale.minCoeff() >= 0.0)) throw InvalidArgument("offset_scale must be >= 0");
  if (z_levels < 1) throw InvalidArgument("z_levels must be >= 1");
}

DcaWeights DcaWeights::seeded(int channels, int image_channels, int num_offsets, std::uint64_t seed) {
  const std::array<int, 2> off_w = {channels, 3 * num_offsets};
  const std::array<int, 2> att_w = {channels, num_offsets};
  const std::array<Activation, 1> none = {Activation::kNone};
  DcaWeights w;
  w.offsets = DenseStack::seeded(off_w, none, derive_seed(seed, 1));
  w.attention = DenseStack::seeded(att_w, none, derive_seed(seed, 2));
  w.projection = seeded_uniform(channels, image_channels, image_channels, derive_seed(seed, 3), 0);
  return w;
}

SparseConv3d SparseConv3d::zeros(int in_channels, int out_channels) {
  SparseConv3d conv;
  conv.in_channels = in_channels;
  conv.out_channels = out_channels;
  conv.taps.assign(27, Eigen::MatrixXd::Zero(out_channels, in_channels));
  conv.bias = Eigen::VectorXd::Zero(out_channels);
  return conv;
}

SparseConv3d SparseConv3d::seeded(int in_channels, int out_channels, std::uint64_t seed) {
  SparseConv3d conv = zeros(in_channels, out_channels);
  const int fan_in = 27 * in_channels;
  for (std::size_t t = 0; t < 27; ++t) {
    conv.taps[t] = seeded_uniform(out_channels, in_channels, fan_in, seed, t);
  }
  conv.bias = seeded_uniform(out_channels, 1, fan_in, seed, 27).col(0);
  return conv;
}

SparseConv3d SparseConv3d::identity(int channels) {
  SparseConv3d conv = zeros(channels, channels);
  conv.tap(0, 0, 0) = Eigen::MatrixXd::Identity(channels, channels);
  return conv;
}

ImaLayerWeights ImaLayerWeights::seeded(int channels, int image_channels, int num_offsets,
                                        std::uint64_t seed) {
  const std::array<int, 3> refine_w = {channels + 3, 32, 3};
  const std::array<Activation, 2> refine_a = {Activation::kRelu, Activation::kNone};
  ImaLayerWeights w;
  w.dca = DcaWeights::seeded(channels, image_channels, num_offsets, derive_seed(seed, 10));
  w.fuse = SparseConv3d::seeded(channels, channels, derive_seed(seed, 11));
  w.refine = DenseStack::seeded(refine_w, refine_a, derive_seed(seed, 12));
  return w;
}

Vec3 normalized_frustum(const CameraModel& camera, const FrustumPoint& f) {
  return {f.u / camera.width(), f.v / camera.height(), f.d / camera.depth_bins().back()};
}

FeatureMatrix deformable_attend(const GaussianField& field, const FeatureVolume& fv,
                                const CameraModel& camera, const DcaWeights& weights,
                                const ImaConfig& config) {
  const VolumeView volume(fv);
  const int t_count = config.num_offsets;
  if (weights.offsets.output_width() != 3 * t_count || weights.attention.output_width() != t_count) {
    throw DimensionMismatch("DCA weights do not match num_offsets");
  }
  if (weights.projection.cols() != volume.channels()) {
    throw DimensionMismatch("DCA projection does not match image channels");
  }
  const int c_out = static_cast<int>(weights.projection.rows());
  if (c_out != field.feature_width()) throw DimensionMismatch("DCA output width != feature width");

  FeatureMatrix out = field.features;
  Eigen::VectorXd sampled(volume.channels());
  for (std::size_t i = 0; i < field.size(); ++i) {
    if (!in_fov(camera, field.positions[i])) continue;
    const FrustumPoint f = project(camera, field.positions[i]);
    const Eigen::VectorXd query = field.features.row(static_cast<Eigen::Index>(i)).transpose();
    const Eigen::VectorXd raw_offsets = weights.offsets.forward(query);
    const Eigen::VectorXd logits = weights.attention.forward(query);
    const Eigen::VectorXd att = (logits.array() - logits.maxCoeff()).exp().matrix();
    const double norm = att.sum();

    sampled.setZero();
    for (int n = 0; n < t_count; ++n) {
      const double du = std::tanh(raw_offsets(3 * n)) * config.offset_scale.x();
      const double dv = std::tanh(raw_offsets(3 * n + 1)) * config.offset_scale.y();
      const double dd = std::tanh(raw_offsets(3 * n + 2)) * config.offset_scale.z();
      sampled += (att(n) / norm) * trilinear(volume, f.u + du, f.v + dv, camera.depth_to_bin(f.d + dd));
    }
    out.row(static_cast<Eigen::Index>(i)) = (weights.projection * sampled).transpose();
  }
  return out;
}

FeatureMatrix sparse_fuse(const GaussianField& field, const SparseVoxelGrid& radar_voxels,
                          const SparseConv3d& weights, const VoxelGridSpec& grid) {
  const int channels = field.feature_width();
  if (weights.in_channels != channels || weights.out_channels != channels) {
    throw DimensionMismatch("sparse conv must map C -> C");
  }
  if (radar_voxels.size() > 0 && radar_voxels.channels() != channels) {
    throw DimensionMismatch("radar voxel channels != gaussian feature width");
  }
  SparseVoxelGrid sites({grid.nx, grid.ny, grid.nz}, channels);
  std::vector<std::optional<std::size_t>> site_of(field.size());
  for (std::size_t i = 0; i < field.size(); ++i) {
    const auto voxel = grid.voxel_of(field.positions[i]);
    if (!voxel) continue;
    const auto row = field.features.row(static_cast<Eigen::Index>(i));
    site_of[i] = sites.insert(*voxel, std::span<const double>(row.data(), static_cast<std::size_t>(channels)));
  }
  for (std::size_t s = 0; s < radar_voxels.size(); ++s) {
    const auto& c = radar_voxels.coords()[s];
    if (!grid.in_bounds(c)) continue;
    sites.insert(c, radar_voxels.value(s));
  }

  std::vector<std::optional<Eigen::VectorXd>> conv_out(sites.size());
  FeatureMatrix out = field.features;
  for (std::size_t i = 0; i < field.size(); ++i) {
    if (!site_of[i]) continue;
    const std::size_t s = *site_of[i];
    if (!conv_out[s]) {
      const VoxelCoord& c = sites.coords()[s];
      Eigen::VectorXd acc = weights.bias;
      for (int dx = -1; dx <= 1; ++dx) {
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dz = -1; dz <= 1; ++dz) {
            const auto n = sites.find({c[0] + dx, c[1] + dy, c[2] + dz});
            if (!n) continue;
            const auto v = sites.value(*n);
            acc.noalias() += weights.tap(dx, dy, dz) * Eigen::Map<const Eigen::VectorXd>(v.data(), channels);
          }
        }
      }
      conv_out[s] = std::move(acc);
    }
    out.row(static_cast<Eigen::Index>(i)) = conv_out[s]->transpose();
  }
  return out;
}

Vec3 predict_offset(const DenseStack& refine, const Eigen::Ref<const Eigen::RowVectorXd>& feature,
                    const CameraModel& camera, const FrustumPoint& f, const Vec3& offset_scale) {
  Eigen::VectorXd input(feature.size() + 3);
  input.head(feature.size()) = feature.transpose();
  input.tail(3) = normalized_frustum(camera, f);
  const Eigen::VectorXd raw = refine.forward(input);
  // raw = (dh, dw, dd): vertical, horizontal, depth.
  return {std::tanh(raw(1)) * offset_scale.x(), std::tanh(raw(0)) * offset_scale.y(),
          std::tanh(raw(2)) * offset_scale.z()};
}

std::vector<Vec3> refine_positions(const GaussianField& field, const CameraModel& camera,
                                   const DenseStack& refine, const Vec3& offset_scale) {
  if (refine.input_width() != field.feature_width() + 3 || refine.output_width() != 3) {
    throw DimensionMismatch("refine MLP must map C + 3 -> 3");
  }
  std::vector<Vec3> out = field.positions;
  for (std::size_t i = 0; i < field.size(); ++i) {
    const Vec3 p_cam = camera.to_camera(field.positions[i]);
    const double depth = (camera.intrinsics() * p_cam).z();
    if (!(depth > kMinDepth)) continue;
    const FrustumPoint f = project(camera, field.positions[i]);
    const Vec3 delta = predict_offset(refine, field.features.row(static_cast<Eigen::Index>(i)), camera,
                                      f, offset_scale);
    if (delta.x() == 0.0 && delta.y() == 0.0 && delta.z() == 0.0) continue;
    const double new_d = std::max(f.d + delta.z(), std::min(f.d, kRefineMinDepth));
    out[i] = unproject(camera, f.u + delta.x(), f.v + delta.y(), new_d);
  }
  return out;
}

std::vector<GaussianField> run_ima(const GaussianField& field, const FeatureVolume& fv,
                                   const PillarSet& pillars, const CameraModel& camera,
                                   std::span<const ImaLayerWeights> weights, const ImaConfig& config,
                                   const VoxelGridSpec& grid) {
  config.validate();
  if (weights.size() < static_cast<std::size_t>(config.num_iterations)) {
    throw DimensionMismatch("run_ima needs one weight set per iteration");
  }
  if (pillars.size() > 0 && pillars.channels() != field.feature_width()) {
    throw DimensionMismatch("pillar channels != gaussian feature width");
  }
  const SparseVoxelGrid radar_voxels =
      pillars.size() > 0 ? replicate_pillars(pillars, config.z_levels, grid.nx, grid.ny)
                         : SparseVoxelGrid({grid.nx, grid.ny, config.z_levels}, field.feature_width());
  std::vector<GaussianField> rounds;
  rounds.reserve(static_cast<std::size_t>(config.num_iterations));
  GaussianField current = field;
  for (int m = 0; m < config.num_iterations; ++m) {
    const auto& w = weights[static_cast<std::size_t>(m)];
    current.features = deformable_attend(current, fv, camera, w.dca, config);
    current.features = sparse_fuse(current, radar_voxels, w.fuse, grid);
    current.positions = refine_positions(current, camera, w.refine, config.offset_scale);
    rounds.push_back(current);
  }
  return rounds;
}

}  // namespace rags
