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

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rags/box.hpp"
#include "rags/camera.hpp"
#include "rags/fli.hpp"
#include "rags/tensor.hpp"
#include "rags/types.hpp"

namespace rags {

enum ObjectClass : int { kCar = 0, kPedestrian = 1, kCyclist = 2 };
inline constexpr int kNumClasses = 3;

// Desk-scale defaults: 96 x 64 image, 16 depth bins over 1..16 m, a 40 x 40
// BEV at 0.32 m and a radar mounted 0.8 m above ground.
CameraModel desk_camera();
BevGeometry desk_bev();
RangeBox desk_range();
inline constexpr double kDeskGroundZ = -0.8;

struct SceneSpec {
  int num_boxes = 4;
  int radar_per_box = 12;
  double clutter_ratio = 0.2;  // fraction of all radar returns that are clutter
  std::uint64_t seed = 0;
  CameraModel camera = desk_camera();
  BevGeometry bev = desk_bev();
  RangeBox range = desk_range();
  double ground_z = kDeskGroundZ;
};

struct Scene {
  std::vector<Box3D> boxes;
  RadarCloud radar;
  std::vector<int> radar_box;  // source box per radar point, -1 for clutter
  CameraModel camera = desk_camera();
  BevGeometry bev = desk_bev();
  RangeBox range = desk_range();
  Tensor gt_depth;      // H x W camera depth of the nearest surface, 0 for no hit
  Tensor gt_seg;        // H x W {0, 1}
  Tensor gt_occupancy;  // X x Y {0, 1}
  std::uint64_t seed = 0;

  friend bool operator==(const Scene&, const Scene&) = default;
};

struct GroundTruth {
  Tensor depth;
  Tensor seg;
  Tensor occupancy;
};

// Analytic ray/box intersection per pixel center (u = column, v = row) and
// footprint/cell overlap per BEV cell. Depths are rounded to float32.
GroundTruth render_ground_truth(const CameraModel& camera, const std::vector<Box3D>& boxes,
                                const BevGeometry& bev);

// Deterministic synthetic scene. Boxes lie fully inside the camera FoV,
// radar returns sit on radar-facing box faces plus uniform clutter.
Scene generate_scene(const SceneSpec& spec);

// Per-class mean box size (l, w, h) and RCS (dB).
Vec3 class_size(int class_id);
double class_rcs(int class_id);

// Seeded Gaussian field scattered over the BEV grid: random unit rotations,
// scales in [min_scale, max_scale] m, opacities in [0.05, 1) and features in [-1, 1].
GaussianField random_field(std::size_t n, int channels, const BevGeometry& grid, std::uint64_t seed,
                           double min_scale = 0.1, double max_scale = 0.5);

// Single JSON document; rasters are embedded as base64 RAGS containers.
std::string scene_to_text(const Scene& scene);
Scene scene_from_text(const std::string& text);
void save_scene(const std::filesystem::path& path, const Scene& scene);
Scene load_scene(const std::filesystem::path& path);

}  // namespace rags
