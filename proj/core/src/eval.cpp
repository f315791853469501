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

#include "rags/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>
#include <tuple>

#include "json_util.hpp"
#include "rags/errors.hpp"

namespace rags {

namespace {

auto box_key(const Box3D& b) {
  return std::make_tuple(b.center.x(), b.center.y(), b.center.z(), b.size.x(), b.size.y(), b.size.z(), b.yaw,
                         b.class_id);
}

Polygon2 to_polygon(const Box3D& box) {
  const auto corners = footprint(box);
  return {corners.begin(), corners.end()};
}

}  // namespace

void Detection::validate() const {
  box.validate();
  if (!std::isfinite(score) || score < 0.0 || score > 1.0) {
    throw InvalidArgument("detection score must be finite and in [0, 1]");
  }
}

double rotated_iou_bev(const Box3D& a, const Box3D& b) {
  const bool swap = box_key(b) < box_key(a);
  const Box3D& first = swap ? b : a;
  const Box3D& second = swap ? a : b;
  const Polygon2 pa = to_polygon(first);
  const Polygon2 pb = to_polygon(second);
  const double area_a = first.size.x() * first.size.y();
  const double area_b = second.size.x() * second.size.y();
  const Polygon2 clipped = clip_convex(pa, pb);
  const double inter = clipped.size() >= 3 ? std::abs(polygon_area(clipped)) : 0.0;
  const double uni = area_a + area_b - inter;
  if (!(uni > 0.0)) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double interpolated_ap(std::span<const double> recall, std::span<const double> precision) {
  if (recall.size() != precision.size()) throw DimensionMismatch("recall and precision lengths differ");
  const std::size_t n = recall.size();
  std::vector<double> mrec(n + 2);
  std::vector<double> mpre(n + 2);
  mrec[0] = 0.0;
  mpre[0] = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mrec[i + 1] = recall[i];
    mpre[i + 1] = precision[i];
  }
  mrec[n + 1] = 1.0;
  mpre[n + 1] = 0.0;
  for (std::size_t i = n + 1; i-- > 0;) mpre[i] = std::max(mpre[i], mpre[i + 1]);
  double ap = 0.0;
  for (std::size_t i = 1; i < n + 2; ++i) {
    if (mrec[i] != mrec[i - 1]) ap += (mrec[i] - mrec[i - 1]) * mpre[i];
  }
  return ap;
}

double average_precision(std::span<const Detection> dets, std::span<const Box3D> gts, double iou_thresh,
                         int class_id) {
  std::vector<const Box3D*> truth;
  for (const auto& g : gts) {
    if (g.class_id == class_id) truth.push_back(&g);
  }
  if (truth.empty()) return 0.0;
  std::vector<const Detection*> ranked;
  for (const auto& d : dets) {
    if (d.class_id == class_id) ranked.push_back(&d);
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const Detection* x, const Detection* y) { return x->score > y->score; });

  std::vector<bool> matched(truth.size(), false);
  std::vector<double> recall;
  std::vector<double> precision;
  std::size_t tp = 0;
  for (std::size_t k = 0; k < ranked.size(); ++k) {
    double best = -1.0;
    std::size_t best_gt = truth.size();
    for (std::size_t g = 0; g < truth.size(); ++g) {
      if (matched[g]) continue;
      const double iou = rotated_iou_bev(ranked[k]->box, *truth[g]);
      if (iou >= iou_thresh && iou > best) {
        best = iou;
        best_gt = g;
      }
    }
    if (best_gt < truth.size()) {
      matched[best_gt] = true;
      ++tp;
    }
    recall.push_back(static_cast<double>(tp) / static_cast<double>(truth.size()));
    precision.push_back(static_cast<double>(tp) / static_cast<double>(k + 1));
  }
  return interpolated_ap(recall, precision);
}

EvalReport evaluate(std::span<const Detection> dets, std::span<const Box3D> gts,
                    std::span<const double> thresholds, const RegionFilter& region) {
  std::vector<Detection> kept_dets;
  std::vector<Box3D> kept_gts;
  for (const auto& d : dets) {
    if (!region || region(d.box)) kept_dets.push_back(d);
  }
  for (const auto& g : gts) {
    if (!region || region(g)) kept_gts.push_back(g);
  }
  std::set<int> classes;
  for (const auto& g : kept_gts) classes.insert(g.class_id);

  EvalReport report;
  for (int c : classes) {
    if (c < 0 || static_cast<std::size_t>(c) >= thresholds.size()) {
      throw InvalidArgument("no IoU threshold for class " + std::to_string(c));
    }
    ClassMetrics m;
    m.class_id = c;
    m.iou_thresh = thresholds[static_cast<std::size_t>(c)];
    m.num_gt = static_cast<std::size_t>(
        std::count_if(kept_gts.begin(), kept_gts.end(), [c](const Box3D& b) { return b.class_id == c; }));
    m.num_det = static_cast<std::size_t>(
        std::count_if(kept_dets.begin(), kept_dets.end(), [c](const Detection& d) { return d.class_id == c; }));
    m.ap = average_precision(kept_dets, kept_gts, m.iou_thresh, c);
    report.classes.push_back(m);
  }
  if (!report.classes.empty()) {
    double sum = 0.0;
    for (const auto& m : report.classes) sum += m.ap;
    report.map = sum / static_cast<double>(report.classes.size());
  }
  return report;
}

double map_over_classes(std::span<const Detection> dets, std::span<const Box3D> gts,
                        std::span<const double> thresholds, const RegionFilter& region) {
  return evaluate(dets, gts, thresholds, region).map;
}

std::vector<Detection> detections_from_text(const std::string& text) {
  const detail::Json j = detail::parse_json(text);
  const detail::Json& list = detail::require(j, "detections", "");
  if (!list.is_array()) throw ParseError("detections", 0, "expected an array");
  std::vector<Detection> out;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string path = "detections[" + std::to_string(i) + "]";
    Detection d;
    d.box.center = detail::vec3_from_json(detail::require(list[i], "center", path), path + ".center");
    d.box.size = detail::vec3_from_json(detail::require(list[i], "size", path), path + ".size");
    d.box.yaw = detail::get<double>(list[i], "yaw", path);
    d.class_id = detail::get<int>(list[i], "class_id", path);
    d.box.class_id = d.class_id;
    d.score = detail::get<double>(list[i], "score", path);
    try {
      d.validate();
    } catch (const InvalidArgument& e) {
      throw ParseError(path, 0, e.what());
    }
    out.push_back(d);
  }
  return out;
}

std::string detections_to_text(std::span<const Detection> dets) {
  detail::Json list = detail::Json::array();
  for (const auto& d : dets) {
    list.push_back({{"center", detail::vec_to_json(d.box.center)},
                    {"size", detail::vec_to_json(d.box.size)},
                    {"yaw", d.box.yaw},
                    {"class_id", d.class_id},
                    {"score", d.score}});
  }
  return detail::Json{{"detections", list}}.dump(2) + "\n";
}

}  // namespace rags
