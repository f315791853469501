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

#include "rags/box.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "rags/errors.hpp"

namespace rags {

namespace {

// Point in the box's local frame (origin at center, x along heading).
Vec3 to_local(const Box3D& box, const Vec3& p) {
  const double c = std::cos(box.yaw);
  const double s = std::sin(box.yaw);
  const Vec3 d = p - box.center;
  return {c * d.x() + s * d.y(), -s * d.x() + c * d.y(), d.z()};
}

Vec3 dir_to_local(const Box3D& box, const Vec3& v) {
  const double c = std::cos(box.yaw);
  const double s = std::sin(box.yaw);
  return {c * v.x() + s * v.y(), -s * v.x() + c * v.y(), v.z()};
}

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

}  // namespace

void Box3D::validate() const {
  if (!center.allFinite() || !size.allFinite() || !std::isfinite(yaw)) {
    throw InvalidArgument("box fields must be finite");
  }
  if (!(size.minCoeff() > 0.0)) throw InvalidArgument("box sizes must be positive");
  if (!(yaw > -std::numbers::pi && yaw <= std::numbers::pi)) {
    throw InvalidArgument("box yaw must lie in (-pi, pi]");
  }
}

double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a, two_pi);
  if (a <= -std::numbers::pi) a += two_pi;
  if (a > std::numbers::pi) a -= two_pi;
  return a;
}

std::array<Vec2, 4> footprint(const Box3D& box) {
  const double c = std::cos(box.yaw);
  const double s = std::sin(box.yaw);
  const double hl = 0.5 * box.size.x();
  const double hw = 0.5 * box.size.y();
  const std::array<Vec2, 4> local = {Vec2(hl, hw), Vec2(-hl, hw), Vec2(-hl, -hw), Vec2(hl, -hw)};
  std::array<Vec2, 4> out;
  for (std::size_t i = 0; i < 4; ++i) {
    out[i] = Vec2(box.center.x() + c * local[i].x() - s * local[i].y(),
                  box.center.y() + s * local[i].x() + c * local[i].y());
  }
  return out;
}

double polygon_area(const Polygon2& poly) {
  const std::size_t n = poly.size();
  if (n < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < n; ++i) twice += cross(poly[i], poly[(i + 1) % n]);
  return 0.5 * twice;
}

Polygon2 clip_convex(const Polygon2& subject, const Polygon2& clip) {
  Polygon2 output = subject;
  const std::size_t m = clip.size();
  for (std::size_t e = 0; e < m && !output.empty(); ++e) {
    const Vec2& a = clip[e];
    const Vec2& b = clip[(e + 1) % m];
    const Vec2 edge = b - a;
    const auto side = [&](const Vec2& p) { return cross(edge, p - a); };

    Polygon2 input;
    input.swap(output);
    const std::size_t n = input.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2& cur = input[i];
      const Vec2& prev = input[(i + n - 1) % n];
      const double sc = side(cur);
      const double sp = side(prev);
      if (sc >= 0.0) {
        if (sp < 0.0) output.push_back(prev + (cur - prev) * (sp / (sp - sc)));
        output.push_back(cur);
      } else if (sp >= 0.0) {
        output.push_back(prev + (cur - prev) * (sp / (sp - sc)));
      }
    }
  }
  return output;
}

bool convex_overlap(const Polygon2& a, const Polygon2& b) {
  const auto separated_along = [](const Polygon2& edges_of, const Polygon2& p, const Polygon2& q) {
    const std::size_t n = edges_of.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2 e = edges_of[(i + 1) % n] - edges_of[i];
      const Vec2 axis(-e.y(), e.x());
      double pmin = std::numeric_limits<double>::infinity();
      double pmax = -pmin;
      double qmin = pmin;
      double qmax = -pmin;
      for (const auto& v : p) {
        pmin = std::min(pmin, axis.dot(v));
        pmax = std::max(pmax, axis.dot(v));
      }
      for (const auto& v : q) {
        qmin = std::min(qmin, axis.dot(v));
        qmax = std::max(qmax, axis.dot(v));
      }
      if (pmax <= qmin || qmax <= pmin) return true;
    }
    return false;
  };
  return !separated_along(a, a, b) && !separated_along(b, a, b);
}

double ray_box_hit(const Box3D& box, const Vec3& origin, const Vec3& dir) {
  const Vec3 o = to_local(box, origin);
  const Vec3 d = dir_to_local(box, dir);
  const Vec3 h = 0.5 * box.size;
  double tmin = -std::numeric_limits<double>::infinity();
  double tmax = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 3; ++k) {
    if (d[k] == 0.0) {
      if (o[k] < -h[k] || o[k] > h[k]) return -1.0;
      continue;
    }
    double t1 = (-h[k] - o[k]) / d[k];
    double t2 = (h[k] - o[k]) / d[k];
    if (t1 > t2) std::swap(t1, t2);
    tmin = std::max(tmin, t1);
    tmax = std::min(tmax, t2);
  }
  if (tmax < std::max(tmin, 0.0)) return -1.0;
  return std::max(tmin, 0.0);
}

bool box_contains(const Box3D& box, const Vec3& p, double tol) {
  const Vec3 q = to_local(box, p);
  const Vec3 h = 0.5 * box.size;
  return std::abs(q.x()) <= h.x() + tol && std::abs(q.y()) <= h.y() + tol &&
         std::abs(q.z()) <= h.z() + tol;
}

double distance_to_surface(const Box3D& box, const Vec3& p) {
  const Vec3 q = to_local(box, p).cwiseAbs();
  const Vec3 h = 0.5 * box.size;
  const Vec3 excess = q - h;
  if (excess.maxCoeff() <= 0.0) return -excess.maxCoeff();
  return excess.cwiseMax(0.0).norm();
}

}  // namespace rags
