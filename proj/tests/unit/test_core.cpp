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

#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "rags/camera.hpp"
#include "rags/errors.hpp"
#include "rags/types.hpp"

namespace {

using rags::Vec3;

TEST(Project, PrincipalAxisPoint) {
  const auto cam = fixture::simple_camera();
  const auto f = rags::project(cam, Vec3(0, 0, 10));
  EXPECT_DOUBLE_EQ(f.u, 64.0);
  EXPECT_DOUBLE_EQ(f.v, 32.0);
  EXPECT_DOUBLE_EQ(f.d, 10.0);
}

TEST(Project, LateralOffset) {
  const auto f = rags::project(fixture::simple_camera(), Vec3(1, 0, 10));
  EXPECT_DOUBLE_EQ(f.u, 74.0);
  EXPECT_DOUBLE_EQ(f.v, 32.0);
  EXPECT_DOUBLE_EQ(f.d, 10.0);
}

TEST(Project, RejectsNonPositiveDepth) {
  const auto cam = fixture::simple_camera();
  EXPECT_THROW(rags::project(cam, Vec3(0, 0, -1)), rags::NonPositiveDepth);
  EXPECT_THROW(rags::project(cam, Vec3(0, 0, 1e-7)), rags::NonPositiveDepth);
}

TEST(Unproject, InvertsSimpleCases) {
  const auto cam = fixture::simple_camera();
  EXPECT_LT((rags::unproject(cam, 64, 32, 10) - Vec3(0, 0, 10)).norm(), 1e-12);
  EXPECT_LT((rags::unproject(cam, 74, 32, 10) - Vec3(1, 0, 10)).norm(), 1e-12);
  EXPECT_THROW(rags::unproject(cam, 1, 1, 0.0), rags::NonPositiveDepth);
}

TEST(Unproject, RoundTripRandomCameras) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto cam = fixture::random_camera(gen);
    const Vec3 pc(20 * u(gen) - 10, 20 * u(gen) - 10, 0.5 + 40 * u(gen));
    const Vec3 p = cam.to_radar(pc);
    const auto f = rags::project(cam, p);
    worst = std::max(worst, (rags::unproject(cam, f.u, f.v, f.d) - p).norm());
    const auto o = oracle::project(cam, p);
    EXPECT_NEAR(f.u, o[0], 1e-9);
    EXPECT_NEAR(f.v, o[1], 1e-9);
  }
  EXPECT_LT(worst, 1e-9);
}

TEST(InFov, HalfOpenBounds) {
  const auto cam = fixture::simple_camera();
  EXPECT_FALSE(rags::in_fov(cam, Vec3(0, 0, -5)));
  EXPECT_TRUE(rags::in_fov(cam, rags::unproject(cam, 127.5, 63.5, 5)));
  EXPECT_FALSE(rags::in_fov(cam, rags::unproject(cam, 128, 64, 5)));
  EXPECT_TRUE(rags::in_fov(cam, rags::unproject(cam, 0, 0, 5)));
}

TEST(InFov, MatchesBruteForce) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(-60.0, 60.0);
  const auto cam = fixture::random_camera(gen);
  std::vector<Vec3> pts;
  for (int i = 0; i < 20000; ++i) pts.emplace_back(u(gen), u(gen), u(gen));
  const auto idx = rags::in_fov(cam, pts);
  std::vector<std::size_t> expect;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (oracle::in_view(cam, pts[i])) expect.push_back(i);
  }
  EXPECT_EQ(idx, expect);
  EXPECT_FALSE(idx.empty());

  std::vector<Vec3> kept;
  for (auto i : idx) kept.push_back(pts[i]);
  EXPECT_EQ(rags::in_fov(cam, kept).size(), kept.size());
}

TEST(Frustum, ForwardAndInverse) {
  const auto cam = fixture::simple_camera();
  const std::vector<Vec3> one{Vec3(0, 0, 10)};
  const auto f = rags::frustum_transform(cam, one);
  ASSERT_EQ(f.size(), 1u);
  EXPECT_DOUBLE_EQ(f[0].u, 64.0);
  EXPECT_DOUBLE_EQ(f[0].v, 32.0);
  EXPECT_DOUBLE_EQ(f[0].d, 10.0);

  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto rc = fixture::random_camera(gen);
  std::vector<Vec3> pts;
  for (int i = 0; i < 1000; ++i) pts.push_back(rc.to_radar(Vec3(8 * u(gen) - 4, 8 * u(gen) - 4, 1 + 30 * u(gen))));
  const auto back = rags::frustum_inverse(rc, rags::frustum_transform(rc, pts));
  double worst = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) worst = std::max(worst, (back[i] - pts[i]).norm());
  EXPECT_LT(worst, 1e-9);
}

TEST(Frustum, ZeroOffsetIsBitIdentical) {
  std::mt19937_64 gen(8);
  const auto cam = fixture::random_camera(gen);
  const Vec3 p = cam.to_radar(Vec3(0.3, -0.2, 7.0));
  const Vec3 q = rags::apply_frustum_offset(cam, p, Vec3::Zero());
  EXPECT_EQ(p, q);
}

TEST(Frustum, DepthOffsetMovesAlongRay) {
  const auto cam = fixture::simple_camera();
  const Vec3 q = rags::apply_frustum_offset(cam, Vec3(0, 0, 10), Vec3(0, 0, 1));
  EXPECT_LT((q - Vec3(0, 0, 11)).norm(), 1e-12);
}

TEST(CameraModel, RejectsInvalidParameters) {
  rags::Mat3 k = fixture::simple_intrinsics();
  const rags::Mat3 r = rags::Mat3::Identity();
  EXPECT_THROW(rags::CameraModel(k, r, Vec3::Zero(), 10, 10, {}), rags::InvalidArgument);
  EXPECT_THROW(rags::CameraModel(k, r, Vec3::Zero(), 10, 10, {2, 1}), rags::InvalidArgument);
  EXPECT_THROW(rags::CameraModel(k, 2.0 * r, Vec3::Zero(), 10, 10, {1}), rags::InvalidArgument);
  rags::Mat3 bad = k;
  bad(2, 2) = 2.0;
  EXPECT_THROW(rags::CameraModel(bad, r, Vec3::Zero(), 10, 10, {1}), rags::InvalidArgument);
  bad = k;
  bad(0, 0) = -1.0;
  EXPECT_THROW(rags::CameraModel(bad, r, Vec3::Zero(), 10, 10, {1}), rags::InvalidArgument);
}

TEST(CameraModel, DepthToBinMatchesReference) {
  const auto cam = fixture::simple_camera();
  for (double d : {0.5, 1.0, 1.5, 3.0, 7.9, 16.0, 31.0, 32.0, 40.0}) {
    EXPECT_NEAR(cam.depth_to_bin(d), oracle::bin_of_depth(cam.depth_bins(), d), 1e-12) << d;
  }
  EXPECT_DOUBLE_EQ(cam.depth_to_bin(4.0), 2.0);
  EXPECT_DOUBLE_EQ(cam.depth_to_bin(6.0), 2.5);
}

TEST(GaussianField, ExplicitBlockHasElevenColumns) {
  rags::GaussianField f;
  f.positions = {Vec3(1, 2, 3), Vec3(4, 5, 6)};
  f.rotations = {rags::identity_quat(), rags::identity_quat()};
  f.scales = {Vec3::Constant(0.2), Vec3::Constant(0.3)};
  f.opacities = {0.5, 0.25};
  f.features = rags::FeatureMatrix::Ones(2, 4);
  f.validate();
  const auto e = f.explicit_block();
  EXPECT_EQ(e.cols(), 11);
  EXPECT_EQ(e.rows(), 2);
  EXPECT_DOUBLE_EQ(e(1, 0), 4.0);
  EXPECT_DOUBLE_EQ(e(1, 3), 1.0);
  EXPECT_DOUBLE_EQ(e(1, 7), 0.3);
  EXPECT_DOUBLE_EQ(e(1, 10), 0.25);

  const auto back = rags::field_from_tensor(rags::field_to_tensor(f));
  EXPECT_TRUE(back == f);
}

TEST(GaussianField, ValidationNamesTheViolation) {
  rags::GaussianField f;
  f.positions = {Vec3::Zero()};
  f.rotations = {rags::Quat(2, 0, 0, 0)};
  f.scales = {Vec3::Constant(0.1)};
  f.opacities = {0.5};
  f.features = rags::FeatureMatrix::Zero(1, 2);
  EXPECT_THROW(f.validate(), rags::InvalidArgument);
  f.rotations[0] = rags::identity_quat();
  f.opacities[0] = 1.0;
  EXPECT_THROW(f.validate(), rags::InvalidArgument);
  f.opacities[0] = 0.5;
  f.scales[0].x() = 0.0;
  EXPECT_THROW(f.validate(), rags::InvalidArgument);
}

TEST(FeatureVolume, RejectsUnnormalizedDepth) {
  rags::FeatureVolume fv{rags::Tensor({2, 2, 3}), rags::Tensor({2, 2, 2}, 0.5), rags::Tensor({2, 2})};
  EXPECT_NO_THROW(fv.validate());
  fv.depth_prob(1, 1, 0) = 0.6;
  EXPECT_THROW(fv.validate(), rags::UnnormalizedDistribution);
  fv.depth_prob(1, 1, 0) = 0.5;
  fv.sparse_depth = rags::Tensor({3, 2});
  EXPECT_THROW(fv.validate(), rags::DimensionMismatch);
}

TEST(BevGeometry, CellOfHalfOpen) {
  rags::BevGeometry g{rags::Vec2(0.0, -1.0), 0.5, 4, 4};
  int ix = -1, iy = -1;
  EXPECT_TRUE(g.cell_of(0.0, -1.0, ix, iy));
  EXPECT_EQ(ix, 0);
  EXPECT_EQ(iy, 0);
  EXPECT_TRUE(g.cell_of(1.99, 0.99, ix, iy));
  EXPECT_EQ(ix, 3);
  EXPECT_EQ(iy, 3);
  EXPECT_FALSE(g.cell_of(2.0, 0.0, ix, iy));
  EXPECT_FALSE(g.cell_of(-0.01, 0.0, ix, iy));
}

}  // namespace
