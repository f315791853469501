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

#include <array>
#include <vector>

#include "rags/camera.hpp"

namespace rags {

// Yawed 3D box in the radar frame. size = (length along heading, width, height).
struct Box3D {
  Vec3 center = Vec3::Zero();
  Vec3 size = Vec3::Ones();
  double yaw = 0.0;  // radians, rotation about +z, in (-pi, pi]
  int class_id = 0;

  void validate() const;
  friend bool operator==(const Box3D&, const Box3D&) = default;
};

// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

using Polygon2 = std::vector<Vec2>;

// Counter-clockwise BEV footprint corners.
std::array<Vec2, 4> footprint(const Box3D& box);

// Signed shoelace area (positive for counter-clockwise).
double polygon_area(const Polygon2& poly);

// Sutherland-Hodgman clip of `subject` by the convex counter-clockwise `clip`.
Polygon2 clip_convex(const Polygon2& subject, const Polygon2& clip);

// True when two convex polygons share interior area (separating-axis test;
// polygons that only touch do not overlap).
bool convex_overlap(const Polygon2& a, const Polygon2& b);

// Ray/box intersection. Returns the smallest t >= 0 at which origin + t*dir
// enters the box, or a negative value when the ray misses.
double ray_box_hit(const Box3D& box, const Vec3& origin, const Vec3& dir);

bool box_contains(const Box3D& box, const Vec3& p, double tol = 0.0);

// Distance from p to the box surface (0 on the surface).
double distance_to_surface(const Box3D& box, const Vec3& p);

}  // namespace rags
