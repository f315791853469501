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

#include "rags/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "json_util.hpp"
#include "rags/errors.hpp"
#include "rags/rng.hpp"
#include "rags/tensor_io.hpp"

namespace rags {

namespace {

using detail::Json;

constexpr int kFormatVersion = 1;
constexpr int kPlacementAttempts = 400;

enum Stream : std::uint64_t { kBoxStream = 1, kRadarStream = 2, kClutterStream = 3, kFieldStream = 4 };

Polygon2 to_polygon(const std::array<Vec2, 4>& corners) { return {corners.begin(), corners.end()}; }

std::array<Vec3, 8> box_corners(const Box3D& box) {
  std::array<Vec3, 8> out;
  const double c = std::cos(box.yaw);
  const double s = std::sin(box.yaw);
  int k = 0;
  for (int sx : {-1, 1}) {
    for (int sy : {-1, 1}) {
      for (int sz : {-1, 1}) {
        const double lx = 0.5 * sx * box.size.x();
        const double ly = 0.5 * sy * box.size.y();
        out[static_cast<std::size_t>(k++)] =
            box.center + Vec3(c * lx - s * ly, s * lx + c * ly, 0.5 * sz * box.size.z());
      }
    }
  }
  return out;
}

double max_speed(int class_id) {
  switch (class_id) {
    case kCar: return 10.0;
    case kPedestrian: return 2.0;
    default: return 5.0;
  }
}

// Samples one return on a face of `box` that faces the radar origin.
bool sample_surface(const Box3D& box, CounterRng& rng, Vec3& out) {
  const double c = std::cos(box.yaw);
  const double s = std::sin(box.yaw);
  const Vec3 half = 0.5 * box.size;
  struct Face {
    int axis;
    double sign;
    double area;
  };
  std::vector<Face> faces;
  double total = 0.0;
  for (int axis = 0; axis < 3; ++axis) {
    for (double sign : {-1.0, 1.0}) {
      Vec3 n_local = Vec3::Zero();
      n_local[axis] = sign;
      const Vec3 n(c * n_local.x() - s * n_local.y(), s * n_local.x() + c * n_local.y(), n_local.z());
      const Vec3 face_center = box.center + half[axis] * n;
      if (n.dot(-face_center) <= 0.0) continue;
      const int a1 = (axis + 1) % 3;
      const int a2 = (axis + 2) % 3;
      const double area = box.size[a1] * box.size[a2];
      faces.push_back({axis, sign, area});
      total += area;
    }
  }
  if (faces.empty()) return false;
  double pick = rng.uniform(0.0, total);
  const Face* chosen = &faces.back();
  for (const auto& f : faces) {
    if (pick < f.area) {
      chosen = &f;
      break;
    }
    pick -= f.area;
  }
  Vec3 local;
  local[chosen->axis] = chosen->sign * half[chosen->axis];
  const int a1 = (chosen->axis + 1) % 3;
  const int a2 = (chosen->axis + 2) % 3;
  local[a1] = rng.uniform(-half[a1], half[a1]);
  local[a2] = rng.uniform(-half[a2], half[a2]);
  out = box.center + Vec3(c * local.x() - s * local.y(), s * local.x() + c * local.y(), local.z());
  return true;
}

bool box_fits(const Box3D& box, const SceneSpec& spec, const std::vector<Box3D>& placed) {
  for (const Vec3& corner : box_corners(box)) {
    if (!in_fov(spec.camera, corner)) return false;
    if (!spec.range.contains(corner)) return false;
  }
  const double x0 = spec.bev.origin.x();
  const double y0 = spec.bev.origin.y();
  const double x1 = x0 + spec.bev.nx * spec.bev.cell_size;
  const double y1 = y0 + spec.bev.ny * spec.bev.cell_size;
  const auto corners = footprint(box);
  for (const Vec2& p : corners) {
    if (p.x() < x0 || p.x() > x1 || p.y() < y0 || p.y() > y1) return false;
  }
  const Polygon2 poly = to_polygon(corners);
  for (const auto& other : placed) {
    if (convex_overlap(poly, to_polygon(footprint(other)))) return false;
  }
  return true;
}

Json tensor_to_json(const Tensor& t) { return base64_encode(encode_tensor(t)); }

Tensor tensor_from_json(const Json& obj, const std::string& key, const std::string& path) {
  const std::string field = detail::join_path(path, key);
  const auto text = detail::get<std::string>(obj, key, path);
  try {
    return decode_tensor(base64_decode(text));
  } catch (const FormatError& e) {
    throw ParseError(field, 0, e.what());
  }
}

}  // namespace

CameraModel desk_camera() {
  Mat3 k;
  k << 64.0, 0.0, 48.0, 0.0, 64.0, 32.0, 0.0, 0.0, 1.0;
  Mat3 r;
  r << 0.0, -1.0, 0.0, 0.0, 0.0, -1.0, 1.0, 0.0, 0.0;
  std::vector<double> bins(16);
  for (std::size_t i = 0; i < bins.size(); ++i) bins[i] = 1.0 + static_cast<double>(i);
  return CameraModel(k, r, Vec3(0.0, 0.2, 0.1), 96, 64, std::move(bins));
}

BevGeometry desk_bev() { return BevGeometry{Vec2(0.0, -6.4), 0.32, 40, 40}; }

RangeBox desk_range() { return RangeBox{}; }

Vec3 class_size(int class_id) {
  switch (class_id) {
    case kCar: return {3.9, 1.6, 1.5};
    case kPedestrian: return {0.6, 0.6, 1.7};
    case kCyclist: return {1.7, 0.6, 1.6};
    default: throw InvalidArgument("unknown class id " + std::to_string(class_id));
  }
}

double class_rcs(int class_id) {
  switch (class_id) {
    case kCar: return 10.0;
    case kPedestrian: return -5.0;
    case kCyclist: return 0.0;
    default: throw InvalidArgument("unknown class id " + std::to_string(class_id));
  }
}

GroundTruth render_ground_truth(const CameraModel& camera, const std::vector<Box3D>& boxes,
                                const BevGeometry& bev) {
  bev.validate();
  const std::size_t h = static_cast<std::size_t>(camera.height());
  const std::size_t w = static_cast<std::size_t>(camera.width());
  GroundTruth gt{Tensor({h, w}), Tensor({h, w}),
                 Tensor({static_cast<std::size_t>(bev.nx), static_cast<std::size_t>(bev.ny)})};
  const Vec3 origin = camera.center_in_radar();
  const Mat3 back = camera.rotation().transpose() * camera.intrinsics_inverse();
  for (std::size_t row = 0; row < h; ++row) {
    for (std::size_t col = 0; col < w; ++col) {
      // Direction scaled so its camera-frame z is 1: the hit parameter is the depth.
      const Vec3 dir = back * Vec3(static_cast<double>(col), static_cast<double>(row), 1.0);
      double best = -1.0;
      for (const auto& box : boxes) {
        const double t = ray_box_hit(box, origin, dir);
        if (t > kMinDepth && (best < 0.0 || t < best)) best = t;
      }
      if (best > 0.0) {
        gt.depth(row, col) = static_cast<float>(best);
        gt.seg(row, col) = 1.0;
      }
    }
  }
  std::vector<Polygon2> polys;
  for (const auto& box : boxes) polys.push_back(to_polygon(footprint(box)));
  for (int ix = 0; ix < bev.nx; ++ix) {
    for (int iy = 0; iy < bev.ny; ++iy) {
      const double x0 = bev.origin.x() + ix * bev.cell_size;
      const double y0 = bev.origin.y() + iy * bev.cell_size;
      const Polygon2 cell{{x0, y0}, {x0 + bev.cell_size, y0}, {x0 + bev.cell_size, y0 + bev.cell_size},
                          {x0, y0 + bev.cell_size}};
      for (const auto& poly : polys) {
        if (convex_overlap(cell, poly)) {
          gt.occupancy(static_cast<std::size_t>(ix), static_cast<std::size_t>(iy)) = 1.0;
          break;
        }
      }
    }
  }
  return gt;
}

Scene generate_scene(const SceneSpec& spec) {
  if (spec.num_boxes < 0) throw InvalidArgument("num_boxes must be non-negative");
  if (spec.radar_per_box < 0) throw InvalidArgument("radar_per_box must be non-negative");
  if (!(spec.clutter_ratio >= 0.0 && spec.clutter_ratio < 1.0)) {
    throw InvalidArgument("clutter_ratio must lie in [0, 1)");
  }
  spec.bev.validate();

  Scene scene;
  scene.camera = spec.camera;
  scene.bev = spec.bev;
  scene.range = spec.range;
  scene.seed = spec.seed;

  CounterRng box_rng(spec.seed, kBoxStream);
  std::vector<Vec3> velocities;
  for (int b = 0; b < spec.num_boxes; ++b) {
    for (int attempt = 0; attempt < kPlacementAttempts; ++attempt) {
      Box3D box;
      box.class_id = static_cast<int>(box_rng.below(kNumClasses));
      const Vec3 mean = class_size(box.class_id);
      for (int a = 0; a < 3; ++a) box.size[a] = mean[a] * box_rng.uniform(0.9, 1.1);
      box.yaw = wrap_angle(box_rng.uniform(-std::numbers::pi, std::numbers::pi));
      const double x = box_rng.uniform(3.5, 11.0);
      const double y = box_rng.uniform(-0.7 * x, 0.7 * x);
      box.center = Vec3(x, y, spec.ground_z + 0.5 * box.size.z());
      const double speed = box_rng.uniform(0.0, max_speed(box.class_id));
      if (!box_fits(box, spec, scene.boxes)) continue;
      scene.boxes.push_back(box);
      velocities.emplace_back(speed * std::cos(box.yaw), speed * std::sin(box.yaw), 0.0);
      break;
    }
  }

  CounterRng radar_rng(spec.seed, kRadarStream);
  for (std::size_t b = 0; b < scene.boxes.size(); ++b) {
    const Box3D& box = scene.boxes[b];
    for (int k = 0; k < spec.radar_per_box; ++k) {
      Vec3 p;
      if (!sample_surface(box, radar_rng, p)) break;
      const double rcs = class_rcs(box.class_id) + radar_rng.normal();
      const double radial = velocities[b].dot(p.normalized());
      scene.radar.points.push_back({p.x(), p.y(), p.z(), rcs, radial});
      scene.radar_box.push_back(static_cast<int>(b));
    }
  }

  const std::size_t surface = scene.radar.points.size();
  const auto clutter = static_cast<std::size_t>(
      std::llround(static_cast<double>(surface) * spec.clutter_ratio / (1.0 - spec.clutter_ratio)));
  CounterRng clutter_rng(spec.seed, kClutterStream);
  const double z_lo = std::max(spec.range.z.min, spec.ground_z);
  for (std::size_t k = 0; k < clutter; ++k) {
    const double x = clutter_rng.uniform(spec.range.x.min, spec.range.x.max);
    const double y = clutter_rng.uniform(spec.range.y.min, spec.range.y.max);
    const double z = clutter_rng.uniform(z_lo, spec.range.z.max);
    const double rcs = -10.0 + 3.0 * clutter_rng.normal();
    const double velocity = 0.5 * clutter_rng.normal();
    scene.radar.points.push_back({x, y, z, rcs, velocity});
    scene.radar_box.push_back(-1);
  }

  GroundTruth gt = render_ground_truth(scene.camera, scene.boxes, scene.bev);
  scene.gt_depth = std::move(gt.depth);
  scene.gt_seg = std::move(gt.seg);
  scene.gt_occupancy = std::move(gt.occupancy);
  return scene;
}

GaussianField random_field(std::size_t n, int channels, const BevGeometry& grid, std::uint64_t seed,
                           double min_scale, double max_scale) {
  grid.validate();
  if (channels < 1) throw InvalidArgument("channels must be >= 1");
  if (!(min_scale > 0.0 && max_scale >= min_scale)) throw InvalidArgument("invalid scale interval");
  CounterRng rng(seed, kFieldStream);
  GaussianField f;
  f.features.resize(static_cast<Eigen::Index>(n), channels);
  const double x1 = grid.origin.x() + grid.nx * grid.cell_size;
  const double y1 = grid.origin.y() + grid.ny * grid.cell_size;
  for (std::size_t i = 0; i < n; ++i) {
    f.positions.emplace_back(rng.uniform(grid.origin.x(), x1), rng.uniform(grid.origin.y(), y1),
                             rng.uniform(-1.0, 1.0));
    Quat q(rng.normal(), rng.normal(), rng.normal(), rng.normal());
    if (q.norm() < 1e-12) q = identity_quat();
    f.rotations.push_back(q.normalized());
    f.scales.emplace_back(rng.uniform(min_scale, max_scale), rng.uniform(min_scale, max_scale),
                          rng.uniform(min_scale, max_scale));
    f.opacities.push_back(rng.uniform(0.05, 1.0));
    for (int c = 0; c < channels; ++c) f.features(static_cast<Eigen::Index>(i), c) = rng.uniform(-1.0, 1.0);
  }
  return f;
}

std::string scene_to_text(const Scene& scene) {
  Json j;
  j["format"] = "rags-scene";
  j["version"] = kFormatVersion;
  j["seed"] = scene.seed;
  const CameraModel& cam = scene.camera;
  j["camera"] = {{"intrinsics", detail::mat_to_json(cam.intrinsics())},
                 {"rotation", detail::mat_to_json(cam.rotation())},
                 {"translation", detail::vec_to_json(cam.translation())},
                 {"width", cam.width()},
                 {"height", cam.height()},
                 {"depth_bins", cam.depth_bins()}};
  j["bev"] = {{"origin", detail::vec_to_json(scene.bev.origin)},
              {"cell_size", scene.bev.cell_size},
              {"nx", scene.bev.nx},
              {"ny", scene.bev.ny}};
  j["range"] = {{"x", {scene.range.x.min, scene.range.x.max}},
                {"y", {scene.range.y.min, scene.range.y.max}},
                {"z", {scene.range.z.min, scene.range.z.max}}};
  Json boxes = Json::array();
  for (const auto& b : scene.boxes) {
    boxes.push_back({{"center", detail::vec_to_json(b.center)},
                     {"size", detail::vec_to_json(b.size)},
                     {"yaw", b.yaw},
                     {"class_id", b.class_id}});
  }
  j["boxes"] = std::move(boxes);
  Json radar = Json::array();
  for (std::size_t i = 0; i < scene.radar.points.size(); ++i) {
    const auto& p = scene.radar.points[i];
    radar.push_back({{"x", p.x},
                     {"y", p.y},
                     {"z", p.z},
                     {"rcs", p.rcs},
                     {"velocity", p.velocity},
                     {"box", i < scene.radar_box.size() ? scene.radar_box[i] : -1}});
  }
  j["radar"] = std::move(radar);
  j["rasters"] = {{"gt_depth", tensor_to_json(scene.gt_depth)},
                  {"gt_seg", tensor_to_json(scene.gt_seg)},
                  {"gt_occupancy", tensor_to_json(scene.gt_occupancy)}};
  return j.dump(2) + "\n";
}

Scene scene_from_text(const std::string& text) {
  const Json j = detail::parse_json(text);
  if (!j.is_object()) throw ParseError("", 1, "scene document must be a JSON object");
  const auto format = detail::get<std::string>(j, "format", "");
  if (format != "rags-scene") throw ParseError("format", 0, "unexpected format '" + format + "'");
  const int version = detail::get<int>(j, "version", "");
  if (version != kFormatVersion) {
    throw ParseError("version", 0, "unsupported scene version " + std::to_string(version));
  }

  Scene scene;
  scene.seed = detail::get<std::uint64_t>(j, "seed", "");

  const Json& cam = detail::require(j, "camera", "");
  try {
    scene.camera = CameraModel(detail::mat3_from_json(detail::require(cam, "intrinsics", "camera"), "camera.intrinsics"),
                               detail::mat3_from_json(detail::require(cam, "rotation", "camera"), "camera.rotation"),
                               detail::vec3_from_json(detail::require(cam, "translation", "camera"),
                                                      "camera.translation"),
                               detail::get<int>(cam, "width", "camera"), detail::get<int>(cam, "height", "camera"),
                               detail::get<std::vector<double>>(cam, "depth_bins", "camera"));
  } catch (const InvalidArgument& e) {
    throw ParseError("camera", 0, e.what());
  }

  const Json& bev = detail::require(j, "bev", "");
  scene.bev.origin = detail::vec2_from_json(detail::require(bev, "origin", "bev"), "bev.origin");
  scene.bev.cell_size = detail::get<double>(bev, "cell_size", "bev");
  scene.bev.nx = detail::get<int>(bev, "nx", "bev");
  scene.bev.ny = detail::get<int>(bev, "ny", "bev");
  try {
    scene.bev.validate();
  } catch (const InvalidArgument& e) {
    throw ParseError("bev", 0, e.what());
  }

  const Json& range = detail::require(j, "range", "");
  for (const char* axis : {"x", "y", "z"}) {
    const Vec2 v = detail::vec2_from_json(detail::require(range, axis, "range"), std::string("range.") + axis);
    AxisRange& target = axis[0] == 'x' ? scene.range.x : (axis[0] == 'y' ? scene.range.y : scene.range.z);
    target = {v.x(), v.y()};
  }

  const Json& boxes = detail::require(j, "boxes", "");
  if (!boxes.is_array()) throw ParseError("boxes", 0, "expected an array");
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const std::string path = "boxes[" + std::to_string(i) + "]";
    Box3D b;
    b.center = detail::vec3_from_json(detail::require(boxes[i], "center", path), path + ".center");
    b.size = detail::vec3_from_json(detail::require(boxes[i], "size", path), path + ".size");
    b.yaw = detail::get<double>(boxes[i], "yaw", path);
    b.class_id = detail::get<int>(boxes[i], "class_id", path);
    try {
      b.validate();
    } catch (const InvalidArgument& e) {
      throw ParseError(path, 0, e.what());
    }
    scene.boxes.push_back(b);
  }

  const Json& radar = detail::require(j, "radar", "");
  if (!radar.is_array()) throw ParseError("radar", 0, "expected an array");
  for (std::size_t i = 0; i < radar.size(); ++i) {
    const std::string path = "radar[" + std::to_string(i) + "]";
    RadarPoint p;
    p.x = detail::get<double>(radar[i], "x", path);
    p.y = detail::get<double>(radar[i], "y", path);
    p.z = detail::get<double>(radar[i], "z", path);
    p.rcs = detail::get<double>(radar[i], "rcs", path);
    p.velocity = detail::get<double>(radar[i], "velocity", path);
    scene.radar.points.push_back(p);
    scene.radar_box.push_back(detail::get_or<int>(radar[i], "box", path, -1));
  }

  const Json& rasters = detail::require(j, "rasters", "");
  scene.gt_depth = tensor_from_json(rasters, "gt_depth", "rasters");
  scene.gt_seg = tensor_from_json(rasters, "gt_seg", "rasters");
  scene.gt_occupancy = tensor_from_json(rasters, "gt_occupancy", "rasters");
  const std::vector<std::size_t> image{static_cast<std::size_t>(scene.camera.height()),
                                       static_cast<std::size_t>(scene.camera.width())};
  const std::vector<std::size_t> grid{static_cast<std::size_t>(scene.bev.nx),
                                      static_cast<std::size_t>(scene.bev.ny)};
  if (scene.gt_depth.shape() != image) throw ParseError("rasters.gt_depth", 0, "shape does not match the camera");
  if (scene.gt_seg.shape() != image) throw ParseError("rasters.gt_seg", 0, "shape does not match the camera");
  if (scene.gt_occupancy.shape() != grid) {
    throw ParseError("rasters.gt_occupancy", 0, "shape does not match the BEV grid");
  }
  return scene;
}

void save_scene(const std::filesystem::path& path, const Scene& scene) {
  const std::string text = scene_to_text(scene);
  write_file(path, std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

Scene load_scene(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return scene_from_text(std::string(bytes.begin(), bytes.end()));
}

}  // namespace rags
