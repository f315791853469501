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

#include "rags/config.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "json_util.hpp"
#include "rags/errors.hpp"
#include "rags/tensor_io.hpp"

namespace rags {

namespace {

using detail::Json;

constexpr double kGeometryTol = 1e-9;

void reject_unknown(const Json& obj, const std::string& path, std::initializer_list<const char*> allowed,
                    std::vector<std::string>& out) {
  if (!obj.is_object()) return;
  const std::set<std::string> names(allowed.begin(), allowed.end());
  for (const auto& item : obj.items()) {
    if (!names.count(item.key())) out.push_back("unknown field '" + detail::join_path(path, item.key()) + "'");
  }
}

template <class F>
void collect(std::vector<std::string>& out, const std::string& prefix, F&& check) {
  try {
    check();
  } catch (const Error& e) {
    out.push_back(prefix + ": " + e.what());
  }
}

Json range_to_json(const RangeBox& r) {
  return {{"x", {r.x.min, r.x.max}}, {"y", {r.y.min, r.y.max}}, {"z", {r.z.min, r.z.max}}};
}

void read_range(const Json& j, const std::string& path, RangeBox& r) {
  for (const char* axis : {"x", "y", "z"}) {
    if (!j.contains(axis)) continue;
    const Vec2 v = detail::vec2_from_json(j.at(axis), detail::join_path(path, axis));
    AxisRange& target = axis[0] == 'x' ? r.x : (axis[0] == 'y' ? r.y : r.z);
    target = {v.x(), v.y()};
  }
}

}  // namespace

VoxelGridSpec PipelineConfig::voxel_grid() const {
  VoxelGridSpec spec;
  const RangeBox& r = init.range;
  spec.origin = Vec3(r.x.min, r.y.min, r.z.min);
  spec.voxel_size = init.voxel_size;
  if (init.voxel_size > 0.0) {
    spec.nx = static_cast<int>(std::lround(r.x.span() / init.voxel_size));
    spec.ny = static_cast<int>(std::lround(r.y.span() / init.voxel_size));
  }
  spec.nz = ima.z_levels;
  return spec;
}

std::vector<std::string> PipelineConfig::violations() const {
  std::vector<std::string> out;
  if (feature_width < 1) out.push_back("feature_width must be >= 1");
  if (image_channels < 1) out.push_back("image_channels must be >= 1");
  collect(out, "init", [&] { init.validate(); });
  collect(out, "ima", [&] { ima.validate(); });
  collect(out, "splat", [&] { splat.validate(); });
  if (!(loss.lambda_aux >= 0.0)) out.push_back("loss.lambda_aux must be >= 0");
  if (!std::isfinite(det_loss)) out.push_back("loss.det_loss must be finite");

  if (splat.levels > ima.num_iterations) {
    out.push_back("splat.levels = " + std::to_string(splat.levels) + " violates L ≤ M (ima.num_iterations = " +
                  std::to_string(ima.num_iterations) + ")");
  }

  const RangeBox& r = init.range;
  const BevGeometry& g = splat.grid;
  const double gx1 = g.origin.x() + g.nx * g.cell_size;
  const double gy1 = g.origin.y() + g.ny * g.cell_size;
  if (std::abs(g.origin.x() - r.x.min) > kGeometryTol || std::abs(gx1 - r.x.max) > kGeometryTol ||
      std::abs(g.origin.y() - r.y.min) > kGeometryTol || std::abs(gy1 - r.y.max) > kGeometryTol) {
    out.push_back("BEV grid extent must match init.range in x and y");
  }
  if (init.voxel_size > 0.0) {
    const VoxelGridSpec v = voxel_grid();
    if (std::abs(v.nx * v.voxel_size - r.x.span()) > kGeometryTol ||
        std::abs(v.ny * v.voxel_size - r.y.span()) > kGeometryTol) {
      out.push_back("init.range x/y extents must be whole multiples of init.voxel_size");
    }
    if (std::abs(ima.z_levels * init.voxel_size - r.z.span()) > kGeometryTol) {
      out.push_back("init.range z extent must equal ima.z_levels x init.voxel_size");
    }
    if (v.nx != g.nx || v.ny != g.ny) out.push_back("radar voxel grid and BEV grid must have the same x/y cells");
  }
  return out;
}

void PipelineConfig::validate() const {
  auto v = violations();
  if (!v.empty()) throw ConfigError(std::move(v));
}

PipelineConfig desk_config() { return PipelineConfig{}; }

std::string config_to_text(const PipelineConfig& c) {
  Json j;
  j["seed"] = c.seed;
  j["feature_width"] = c.feature_width;
  j["image_channels"] = c.image_channels;
  j["init"] = {{"n_total", c.init.n_total},
               {"top_k", c.init.top_k},
               {"n_sample", c.init.n_sample},
               {"voxel_size", c.init.voxel_size},
               {"range", range_to_json(c.init.range)}};
  j["ima"] = {{"num_iterations", c.ima.num_iterations},
              {"num_offsets", c.ima.num_offsets},
              {"offset_scale", detail::vec_to_json(c.ima.offset_scale)},
              {"z_levels", c.ima.z_levels}};
  j["splat"] = {{"grid",
                 {{"origin", detail::vec_to_json(c.splat.grid.origin)},
                  {"cell_size", c.splat.grid.cell_size},
                  {"nx", c.splat.grid.nx},
                  {"ny", c.splat.grid.ny}}},
                {"cutoff_sigma", c.splat.cutoff_sigma},
                {"tile_size", c.splat.tile_size},
                {"levels", c.splat.levels},
                {"threads", c.splat.threads}};
  j["loss"] = {{"lambda_aux", c.loss.lambda_aux}, {"det_loss", c.det_loss}};
  return j.dump(2) + "\n";
}

PipelineConfig config_from_text(const std::string& text) {
  const Json j = detail::parse_json(text);
  if (!j.is_object()) throw ParseError("", 1, "config document must be a JSON object");
  std::vector<std::string> unknown;
  reject_unknown(j, "", {"seed", "feature_width", "image_channels", "init", "ima", "splat", "loss"}, unknown);

  PipelineConfig c;
  c.seed = detail::get_or<std::uint64_t>(j, "seed", "", c.seed);
  c.feature_width = detail::get_or<int>(j, "feature_width", "", c.feature_width);
  c.image_channels = detail::get_or<int>(j, "image_channels", "", c.image_channels);

  if (j.contains("init")) {
    const Json& s = j.at("init");
    reject_unknown(s, "init", {"n_total", "top_k", "n_sample", "voxel_size", "range"}, unknown);
    c.init.n_total = detail::get_or<std::size_t>(s, "n_total", "init", c.init.n_total);
    c.init.top_k = detail::get_or<std::size_t>(s, "top_k", "init", c.init.top_k);
    c.init.n_sample = detail::get_or<std::size_t>(s, "n_sample", "init", c.init.n_sample);
    c.init.voxel_size = detail::get_or<double>(s, "voxel_size", "init", c.init.voxel_size);
    if (s.contains("range")) {
      reject_unknown(s.at("range"), "init.range", {"x", "y", "z"}, unknown);
      read_range(s.at("range"), "init.range", c.init.range);
    }
  }
  if (j.contains("ima")) {
    const Json& s = j.at("ima");
    reject_unknown(s, "ima", {"num_iterations", "num_offsets", "offset_scale", "z_levels"}, unknown);
    c.ima.num_iterations = detail::get_or<int>(s, "num_iterations", "ima", c.ima.num_iterations);
    c.ima.num_offsets = detail::get_or<int>(s, "num_offsets", "ima", c.ima.num_offsets);
    if (s.contains("offset_scale")) c.ima.offset_scale = detail::vec3_from_json(s.at("offset_scale"), "ima.offset_scale");
    c.ima.z_levels = detail::get_or<int>(s, "z_levels", "ima", c.ima.z_levels);
  }
  if (j.contains("splat")) {
    const Json& s = j.at("splat");
    reject_unknown(s, "splat", {"grid", "cutoff_sigma", "tile_size", "levels", "threads"}, unknown);
    if (s.contains("grid")) {
      const Json& g = s.at("grid");
      reject_unknown(g, "splat.grid", {"origin", "cell_size", "nx", "ny"}, unknown);
      if (g.contains("origin")) c.splat.grid.origin = detail::vec2_from_json(g.at("origin"), "splat.grid.origin");
      c.splat.grid.cell_size = detail::get_or<double>(g, "cell_size", "splat.grid", c.splat.grid.cell_size);
      c.splat.grid.nx = detail::get_or<int>(g, "nx", "splat.grid", c.splat.grid.nx);
      c.splat.grid.ny = detail::get_or<int>(g, "ny", "splat.grid", c.splat.grid.ny);
    }
    c.splat.cutoff_sigma = detail::get_or<double>(s, "cutoff_sigma", "splat", c.splat.cutoff_sigma);
    c.splat.tile_size = detail::get_or<int>(s, "tile_size", "splat", c.splat.tile_size);
    c.splat.levels = detail::get_or<int>(s, "levels", "splat", c.splat.levels);
    c.splat.threads = detail::get_or<int>(s, "threads", "splat", c.splat.threads);
  }
  if (j.contains("loss")) {
    const Json& s = j.at("loss");
    reject_unknown(s, "loss", {"lambda_aux", "det_loss"}, unknown);
    c.loss.lambda_aux = detail::get_or<double>(s, "lambda_aux", "loss", c.loss.lambda_aux);
    c.det_loss = detail::get_or<double>(s, "det_loss", "loss", c.det_loss);
  }

  auto violations = c.violations();
  violations.insert(violations.begin(), unknown.begin(), unknown.end());
  if (!violations.empty()) throw ConfigError(std::move(violations));
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return config_from_text(std::string(bytes.begin(), bytes.end()));
}

void save_config(const std::filesystem::path& path, const PipelineConfig& config) {
  const std::string text = config_to_text(config);
  write_file(path, std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace rags
