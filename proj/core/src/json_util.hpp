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

#include <cstddef>
#include <string>

#include <json.hpp>

#include "rags/camera.hpp"
#include "rags/errors.hpp"

namespace rags::detail {

using Json = nlohmann::json;

inline std::size_t line_of_byte(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') ++line;
  }
  return line;
}

inline Json parse_json(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError("", line_of_byte(text, e.byte), e.what());
  }
}

inline std::string join_path(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

inline const Json& require(const Json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw ParseError(path, 0, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) {
    throw ParseError(join_path(path, key), 0, "missing required field '" + join_path(path, key) + "'");
  }
  return *it;
}

template <class T>
T as(const Json& value, const std::string& path) {
  try {
    return value.get<T>();
  } catch (const Json::exception& e) {
    throw ParseError(path, 0, e.what());
  }
}

template <class T>
T get(const Json& obj, const std::string& key, const std::string& path) {
  return as<T>(require(obj, key, path), join_path(path, key));
}

template <class T>
T get_or(const Json& obj, const std::string& key, const std::string& path, T fallback) {
  if (!obj.is_object()) throw ParseError(path, 0, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  return as<T>(*it, join_path(path, key));
}

inline Json vec_to_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }
inline Json vec_to_json(const Vec2& v) { return Json::array({v.x(), v.y()}); }

inline Json mat_to_json(const Mat3& m) {
  Json rows = Json::array();
  for (int r = 0; r < 3; ++r) rows.push_back(Json::array({m(r, 0), m(r, 1), m(r, 2)}));
  return rows;
}

inline Vec3 vec3_from_json(const Json& j, const std::string& path) {
  const auto v = as<std::vector<double>>(j, path);
  if (v.size() != 3) throw ParseError(path, 0, "expected 3 numbers");
  return {v[0], v[1], v[2]};
}

inline Vec2 vec2_from_json(const Json& j, const std::string& path) {
  const auto v = as<std::vector<double>>(j, path);
  if (v.size() != 2) throw ParseError(path, 0, "expected 2 numbers");
  return {v[0], v[1]};
}

inline Mat3 mat3_from_json(const Json& j, const std::string& path) {
  const auto rows = as<std::vector<std::vector<double>>>(j, path);
  if (rows.size() != 3) throw ParseError(path, 0, "expected a 3x3 matrix");
  Mat3 m;
  for (int r = 0; r < 3; ++r) {
    if (rows[static_cast<std::size_t>(r)].size() != 3) throw ParseError(path, 0, "expected a 3x3 matrix");
    for (int c = 0; c < 3; ++c) m(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
  }
  return m;
}

}  // namespace rags::detail
