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

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rags/box.hpp"

namespace rags {

struct Detection {
  Box3D box;
  double score = 0.0;  // [0, 1]
  int class_id = 0;

  void validate() const;
};

// IoU of the two yawed BEV rectangles. Exactly symmetric in its arguments.
double rotated_iou_bev(const Box3D& a, const Box3D& b);

// Restricts evaluation to boxes the predicate accepts (both detections and ground truth).
using RegionFilter = std::function<bool(const Box3D&)>;

// All-point interpolated AP for one class. Ground-truth boxes are matched by
// their own class_id. A class with no ground truth scores 0.
double average_precision(std::span<const Detection> dets, std::span<const Box3D> gts, double iou_thresh,
                         int class_id);

// Area under the all-point interpolated precision/recall curve.
double interpolated_ap(std::span<const double> recall, std::span<const double> precision);

struct ClassMetrics {
  int class_id = 0;
  double ap = 0.0;
  double iou_thresh = 0.0;
  std::size_t num_gt = 0;
  std::size_t num_det = 0;
};

struct EvalReport {
  std::vector<ClassMetrics> classes;  // classes present in ground truth, ascending id
  double map = 0.0;
};

// thresholds[class_id] is the IoU threshold of that class.
EvalReport evaluate(std::span<const Detection> dets, std::span<const Box3D> gts,
                    std::span<const double> thresholds, const RegionFilter& region = {});

// Unweighted mean of per-class AP over classes present in ground truth.
double map_over_classes(std::span<const Detection> dets, std::span<const Box3D> gts,
                        std::span<const double> thresholds, const RegionFilter& region = {});

// {"detections": [{"center": [x,y,z], "size": [l,w,h], "yaw": r, "class_id": k, "score": s}, ...]}
// Throws ParseError naming the offending field.
std::vector<Detection> detections_from_text(const std::string& text);
std::string detections_to_text(std::span<const Detection> dets);

}  // namespace rags
