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

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "rags/errors.hpp"
#include "rags/eval.hpp"

namespace {

using rags::Box3D;
using rags::Detection;
using rags::Vec3;

Box3D box(double x, double y, double l = 1.0, double w = 1.0, double yaw = 0.0, int cls = 0) {
  Box3D b;
  b.center = Vec3(x, y, 0.0);
  b.size = Vec3(l, w, 1.0);
  b.yaw = yaw;
  b.class_id = cls;
  return b;
}

Detection det(const Box3D& b, double score) {
  return Detection{b, score, b.class_id};
}

Box3D random_box(std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return box(4.0 * u(gen) - 2.0, 4.0 * u(gen) - 2.0, 0.5 + 3.0 * u(gen), 0.5 + 2.0 * u(gen),
             (2.0 * u(gen) - 1.0) * std::numbers::pi);
}

TEST(RotatedIou, Examples) {
  EXPECT_EQ(rags::rotated_iou_bev(box(0, 0), box(0, 0)), 1.0);
  EXPECT_EQ(rags::rotated_iou_bev(box(0, 0), box(5, 0)), 0.0);
  EXPECT_NEAR(rags::rotated_iou_bev(box(0, 0), box(0.5, 0)), 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(rags::rotated_iou_bev(box(0, 0, 2, 1), box(0, 0, 2, 1, std::numbers::pi / 2)), 1.0 / 3.0, 1e-12);
  EXPECT_EQ(rags::rotated_iou_bev(box(0, 0), box(1, 0)), 0.0);
}

TEST(RotatedIou, SymmetricAndRigidInvariant) {
  std::mt19937_64 gen(12);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    const Box3D a = random_box(gen), b = random_box(gen);
    const double iou = rags::rotated_iou_bev(a, b);
    EXPECT_EQ(iou, rags::rotated_iou_bev(b, a));
    EXPECT_GE(iou, 0.0);
    EXPECT_LE(iou, 1.0);

    const double th = u(gen) * std::numbers::pi;
    const double tx = 5.0 * u(gen), ty = 5.0 * u(gen);
    auto move = [&](Box3D x) {
      const double c = std::cos(th), s = std::sin(th);
      x.center = Vec3(c * x.center.x() - s * x.center.y() + tx, s * x.center.x() + c * x.center.y() + ty, 0.0);
      x.yaw = rags::wrap_angle(x.yaw + th);
      return x;
    };
    EXPECT_NEAR(rags::rotated_iou_bev(move(a), move(b)), iou, 1e-9);
  }
}

TEST(RotatedIou, AgreesWithMonteCarlo) {
  std::mt19937_64 gen(8);
  for (int t = 0; t < 10; ++t) {
    const Box3D a = random_box(gen), b = random_box(gen);
    EXPECT_NEAR(rags::rotated_iou_bev(a, b), oracle::monte_carlo_iou(a, b, 800, 100 + t), 2e-3);
  }
}

TEST(AveragePrecision, PerfectAndEmpty) {
  const std::vector<Box3D> gts{box(0, 0), box(5, 0), box(10, 0)};
  std::vector<Detection> dets;
  for (const auto& g : gts) dets.push_back(det(g, 0.9));
  EXPECT_EQ(rags::average_precision(dets, gts, 0.5, 0), 1.0);
  EXPECT_EQ(rags::average_precision({}, gts, 0.5, 0), 0.0);
  EXPECT_EQ(rags::average_precision(dets, {}, 0.5, 0), 0.0);
}

TEST(AveragePrecision, HandComputedCurve) {
  const std::vector<Box3D> gts{box(0, 0), box(10, 0)};
  const std::vector<Detection> dets{det(box(0, 0), 0.9), det(box(50, 0), 0.8), det(box(10, 0), 0.7)};
  // PR points (0.5, 1), (0.5, 0.5), (1, 2/3)
  EXPECT_NEAR(rags::average_precision(dets, gts, 0.5, 0), 0.5 * 1.0 + 0.5 * (2.0 / 3.0), 1e-15);
}

TEST(AveragePrecision, DuplicateCountsOnce) {
  const std::vector<Box3D> gts{box(0, 0)};
  const std::vector<Detection> dets{det(box(0, 0), 0.9), det(box(0.05, 0), 0.8)};
  EXPECT_EQ(rags::average_precision(dets, gts, 0.5, 0), 1.0);
}

TEST(AveragePrecision, ThresholdIsInclusive) {
  const std::vector<Box3D> gts{box(0, 0)};
  const std::vector<Detection> dets{det(box(0.5, 0), 0.9)};
  const double iou = rags::rotated_iou_bev(dets[0].box, gts[0]);
  EXPECT_EQ(rags::average_precision(dets, gts, iou, 0), 1.0);
  EXPECT_EQ(rags::average_precision(dets, gts, std::nextafter(iou, 1.0), 0), 0.0);
}

TEST(AveragePrecision, AddingTruePositiveAtTopNeverHurts) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    std::vector<Box3D> gts;
    std::vector<Detection> dets;
    for (int i = 0; i < 6; ++i) gts.push_back(box(6.0 * i, 0.0));
    for (int i = 0; i < 6; ++i) {
      if (u(gen) < 0.5) dets.push_back(det(gts[static_cast<std::size_t>(i)], 0.1 + 0.8 * u(gen)));
      if (u(gen) < 0.5) dets.push_back(det(box(6.0 * i + 3.0, 0.0), 0.1 + 0.8 * u(gen)));
    }
    const double before = rags::average_precision(dets, gts, 0.5, 0);
    std::size_t missing = gts.size();
    for (std::size_t g = 0; g < gts.size(); ++g) {
      bool covered = false;
      for (const auto& d : dets) covered |= d.box == gts[g];
      if (!covered) missing = g;
    }
    if (missing == gts.size()) continue;
    dets.push_back(det(gts[missing], 0.95));
    EXPECT_GE(rags::average_precision(dets, gts, 0.5, 0), before);
  }
}

TEST(InterpolatedAp, Envelope) {
  const std::vector<double> r{0.25, 0.5, 0.75, 1.0};
  const std::vector<double> p{1.0, 0.5, 0.75, 0.5};
  EXPECT_NEAR(rags::interpolated_ap(r, p), 0.25 * 1.0 + 0.25 * 0.75 + 0.25 * 0.75 + 0.25 * 0.5, 1e-15);
  EXPECT_THROW(rags::interpolated_ap(r, std::vector<double>{1.0}), rags::DimensionMismatch);
}

TEST(MeanAp, AveragesPresentClasses) {
  const std::vector<double> thresholds{0.5, 0.25, 0.25};
  const std::vector<Box3D> gts{box(0, 0, 1, 1, 0, 0), box(10, 0, 1, 1, 0, 1)};
  const std::vector<Detection> dets{det(box(0, 0, 1, 1, 0, 0), 0.9)};
  const auto report = rags::evaluate(dets, gts, thresholds);
  ASSERT_EQ(report.classes.size(), 2u);
  EXPECT_EQ(report.classes[0].ap, 1.0);
  EXPECT_EQ(report.classes[1].ap, 0.0);
  EXPECT_EQ(report.map, 0.5);
  EXPECT_EQ(rags::map_over_classes(dets, gts, thresholds), 0.5);

  // A class absent from ground truth does not enter the mean.
  std::vector<Detection> extra = dets;
  extra.push_back(det(box(20, 0, 1, 1, 0, 2), 0.9));
  EXPECT_EQ(rags::map_over_classes(extra, gts, thresholds), 0.5);
  EXPECT_EQ(rags::map_over_classes(dets, {}, thresholds), 0.0);
}

TEST(MeanAp, EqualsMeanOfPerClassAp) {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::vector<double> thresholds{0.5, 0.25, 0.25};
  std::vector<Box3D> gts;
  std::vector<Detection> dets;
  for (int i = 0; i < 15; ++i) {
    const int cls = i % 3;
    gts.push_back(box(5.0 * i, 0.0, 1.5, 1.0, 0.0, cls));
    dets.push_back(det(box(5.0 * i + 0.6 * u(gen), 0.3 * u(gen), 1.5, 1.0, 0.2 * u(gen), cls), u(gen)));
  }
  double sum = 0.0;
  for (int c = 0; c < 3; ++c) sum += rags::average_precision(dets, gts, thresholds[static_cast<std::size_t>(c)], c);
  EXPECT_NEAR(rags::map_over_classes(dets, gts, thresholds), sum / 3.0, 1e-15);
}

TEST(MeanAp, RegionFilter) {
  const std::vector<double> thresholds{0.5};
  const std::vector<Box3D> gts{box(0, 0), box(30, 0)};
  const std::vector<Detection> dets{det(box(0, 0), 0.9)};
  EXPECT_EQ(rags::map_over_classes(dets, gts, thresholds), 0.5);
  const auto near = [](const Box3D& b) { return b.center.x() < 20.0; };
  EXPECT_EQ(rags::map_over_classes(dets, gts, thresholds, near), 1.0);
}

TEST(Detections, TextRoundTrip) {
  const std::vector<Detection> dets{det(box(1, 2, 3, 1.5, 0.5, 1), 0.25), det(box(-1, 0.5), 1.0)};
  const auto back = rags::detections_from_text(rags::detections_to_text(dets));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].box, dets[0].box);
  EXPECT_EQ(back[0].score, 0.25);
  EXPECT_EQ(back[1].class_id, 0);
}

TEST(Detections, ParseErrorsNameTheField) {
  const auto field_of = [](const std::string& text) -> std::string {
    try {
      rags::detections_from_text(text);
    } catch (const rags::ParseError& e) {
      return e.field();
    }
    return "<no error>";
  };
  EXPECT_EQ(field_of("{}"), "detections");
  EXPECT_NE(field_of(R"({"detections": [{"center": [0,0,0], "size": [1,1,1], "class_id": 0, "score": 0.5}]})")
                .find("yaw"),
            std::string::npos);
  EXPECT_NE(field_of(R"({"detections": [{"center": [0,0], "size": [1,1,1], "yaw": 0, "class_id": 0, "score": 0.5}]})")
                .find("center"),
            std::string::npos);
  EXPECT_EQ(field_of(R"({"detections": [{"center": [0,0,0], "size": [1,1,1], "yaw": 0, "class_id": 0, "score": 1.5}]})"),
            "detections[0]");
  EXPECT_THROW(rags::detections_from_text("not json"), rags::ParseError);
}

}  // namespace
