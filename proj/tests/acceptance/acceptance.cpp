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

// Desk-scale acceptance run: one line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "commands.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "rags/config.hpp"
#include "rags/eval.hpp"
#include "rags/fli.hpp"
#include "rags/ima.hpp"
#include "rags/nn.hpp"
#include "rags/pipeline.hpp"
#include "rags/scene.hpp"
#include "rags/splat.hpp"

namespace {

using rags::Vec2;
using rags::Vec3;
namespace fs = std::filesystem;

// Pinned tolerances and limits.
constexpr double kGeometryTol = 1e-9;
constexpr double kGeometrySeconds = 1.0;
constexpr double kDcaTol = 1e-9;
constexpr double kSparseTol = 1e-9;
constexpr double kRasterTol = 1e-12;
constexpr double kGradRelTol = 1e-3;
constexpr double kRasterBudgetMs = 250.0;
constexpr double kSpeedupTarget = 3.0;
constexpr double kSpeedupSlack = 2.0;
constexpr double kIouTol = 2e-3;
constexpr int kIouSide = 1000;
constexpr double kPipelineSeconds = 10.0;

enum class Status { kPass, kFail, kSkip };

struct Verdict {
  Status status = Status::kPass;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string num(double v) {
  std::ostringstream s;
  s.precision(3);
  s << v;
  return s.str();
}

Verdict ac1_geometry() {
  std::mt19937_64 gen(1001);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<rags::CameraModel> cams;
  for (int i = 0; i < 16; ++i) cams.push_back(fixture::random_camera(gen));
  double proj_err = 0.0, frustum_err = 0.0;
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < 10000; ++i) {
    const auto& cam = cams[static_cast<std::size_t>(i) % cams.size()];
    const Vec3 p = cam.to_radar(Vec3(40 * u(gen) - 20, 40 * u(gen) - 20, 0.5 + 60 * u(gen)));
    const auto f = rags::project(cam, p);
    proj_err = std::max(proj_err, (rags::unproject(cam, f.u, f.v, f.d) - p).norm());
    const std::vector<Vec3> one{p};
    const auto back = rags::frustum_inverse(cam, rags::frustum_transform(cam, one));
    frustum_err = std::max(frustum_err, (back[0] - p).norm());
  }
  const double secs = seconds_since(t0);
  const bool ok = proj_err < kGeometryTol && frustum_err < kGeometryTol && secs < kGeometrySeconds;
  return {ok ? Status::kPass : Status::kFail, "10000 samples, project/unproject max err " + num(proj_err) +
                                                  ", frustum max err " + num(frustum_err) + ", " + num(secs) + " s"};
}

Verdict ac2_budget() {
  int failures = 0;
  int empty = 0, overflow = 0, underflow = 0;
  bool width_ok = true;
  for (int s = 0; s < 200; ++s) {
    rags::SceneSpec spec;
    spec.seed = static_cast<std::uint64_t>(s);
    const int regime = s % 3;
    if (regime == 0) {
      spec.radar_per_box = 0;
      spec.clutter_ratio = 0.0;
    } else if (regime == 1) {
      spec.radar_per_box = 80;
    } else {
      spec.radar_per_box = 2;
    }
    const auto scene = rags::generate_scene(spec);
    const std::size_t budget = 64 + 16 * static_cast<std::size_t>(s % 10);
    const auto cfg = rags::InitConfig::for_budget(budget, scene.range);
    const auto cues = rags::synthesize_image_cues(scene, 4, static_cast<std::uint64_t>(s));
    const auto pixels = rags::select_foreground(cues.seg_logits, cues.depth, cfg.top_k);
    const auto p_unproj = rags::unproject_foreground(scene.camera, pixels);
    const auto p_sample = rags::sample_frustum(scene.camera, cfg, static_cast<std::uint64_t>(s));
    const auto cand = rags::frustum_candidates(scene.camera, cfg);
    const auto radar = scene.radar.positions();
    const std::size_t raw = p_unproj.size() + p_sample.size() + radar.size();
    if (radar.empty()) ++empty;
    if (raw > budget) ++overflow;
    if (raw < budget) ++underflow;

    const auto out = rags::gather_positions(p_unproj, p_sample, radar, cand, cfg);
    bool ok = out.size() == budget;
    for (const auto& p : out) ok = ok && p.allFinite() && cfg.range.contains(p);
    const auto field = rags::init_field(out, 8, static_cast<std::uint64_t>(s));
    width_ok = width_ok && field.explicit_block().cols() == 11 && field.explicit_block().rows() ==
                                                                      static_cast<Eigen::Index>(budget);
    if (!ok) ++failures;
  }
  const bool ok = failures == 0 && width_ok && empty > 0 && overflow > 0 && underflow > 0;
  return {ok ? Status::kPass : Status::kFail,
          "200 scenes (" + std::to_string(empty) + " empty-radar, " + std::to_string(overflow) + " overflow, " +
              std::to_string(underflow) + " underflow), " + std::to_string(failures) +
              " budget violations, explicit width 11: " + (width_ok ? "yes" : "no")};
}

rags::CameraModel volume_camera(int h, int w, int d) {
  rags::Mat3 k;
  k << 10, 0, 0.5 * w, 0, 10, 0.5 * h, 0, 0, 1;
  std::vector<double> bins;
  for (int b = 1; b <= d; ++b) bins.push_back(b);
  return rags::CameraModel(k, rags::Mat3::Identity(), Vec3::Zero(), w, h, bins);
}

Verdict ac3_dca() {
  std::mt19937_64 gen(3003);
  std::uniform_int_distribution<int> hw(2, 8), dd(2, 4), ch(1, 6), nq(1, 12), off(1, 6);
  std::uniform_real_distribution<double> lat(-0.6, 0.6);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const int h = hw(gen), w = hw(gen), d = dd(gen), c_img = ch(gen), c = ch(gen) + 1;
    const auto cam = volume_camera(h, w, d);
    const auto fv = fixture::random_volume(h, w, d, c_img, gen);
    rags::ImaConfig cfg;
    cfg.num_offsets = off(gen);
    cfg.offset_scale = Vec3(2.0, 2.0, 1.0);
    std::uniform_real_distribution<double> z(0.3, d + 1.0);
    std::vector<Vec3> pts;
    const int n = nq(gen);
    for (int i = 0; i < n; ++i) {
      const double depth = z(gen);
      pts.emplace_back(lat(gen) * depth * w / 10.0, lat(gen) * depth * h / 10.0, depth);
    }
    const auto field = rags::init_field(pts, c, static_cast<std::uint64_t>(t));
    const auto weights = rags::DcaWeights::seeded(c, c_img, cfg.num_offsets, static_cast<std::uint64_t>(500 + t));
    const auto got = rags::deformable_attend(field, fv, cam, weights, cfg);
    const auto ref = oracle::deformable_attend(field, fv, cam, weights, cfg);
    worst = std::max(worst, fixture::max_abs_diff(got, ref));
  }
  return {worst <= kDcaTol ? Status::kPass : Status::kFail, "100 cases, max abs diff " + num(worst)};
}

Verdict ac4_sparse() {
  std::mt19937_64 gen(4004);
  std::uniform_int_distribution<int> dim(1, 16), ch(1, 6), ng(0, 30), npil(0, 20);
  std::uniform_real_distribution<double> u(0.0, 1.0), f(-1.0, 1.0);
  double worst = 0.0;
  bool cardinality = true;
  for (int t = 0; t < 100; ++t) {
    const int nx = dim(gen), ny = dim(gen), nz = dim(gen), c = ch(gen);
    const rags::VoxelGridSpec grid{Vec3(-1.0, 2.0, -0.5), 0.5, nx, ny, nz};
    std::vector<Vec3> pts;
    const int n = ng(gen);
    for (int i = 0; i < n; ++i) {
      // a few land outside the grid on purpose
      pts.emplace_back(-1.0 + (1.1 * u(gen) - 0.05) * nx * 0.5, 2.0 + (1.1 * u(gen) - 0.05) * ny * 0.5,
                       -0.5 + (1.1 * u(gen) - 0.05) * nz * 0.5);
    }
    const auto field = rags::init_field(pts, c, static_cast<std::uint64_t>(t));

    rags::PillarSet pillars;
    std::vector<std::array<int, 2>> cells;
    for (int ix = 0; ix < nx; ++ix) {
      for (int iy = 0; iy < ny; ++iy) cells.push_back({ix, iy});
    }
    std::shuffle(cells.begin(), cells.end(), gen);
    const std::size_t g = std::min<std::size_t>(static_cast<std::size_t>(npil(gen)), cells.size());
    pillars.coords.assign(cells.begin(), cells.begin() + static_cast<std::ptrdiff_t>(g));
    std::sort(pillars.coords.begin(), pillars.coords.end());
    pillars.features = rags::FeatureMatrix(static_cast<Eigen::Index>(g), c);
    for (Eigen::Index r = 0; r < pillars.features.rows(); ++r) {
      for (int k = 0; k < c; ++k) pillars.features(r, k) = f(gen);
    }
    const auto radar = rags::replicate_pillars(pillars, nz, nx, ny);
    cardinality = cardinality && radar.size() == g * static_cast<std::size_t>(nz);

    const auto w = rags::SparseConv3d::seeded(c, c, static_cast<std::uint64_t>(900 + t));
    const auto got = rags::sparse_fuse(field, radar, w, grid);
    const auto ref = oracle::dense_fuse(field, radar, w, grid);
    worst = std::max(worst, fixture::max_abs_diff(got, ref));
  }
  const bool ok = worst <= kSparseTol && cardinality;
  return {ok ? Status::kPass : Status::kFail, "100 instances, max abs diff " + num(worst) +
                                                  ", G x Z radar voxels: " + (cardinality ? "yes" : "no")};
}

Verdict ac5_raster() {
  std::mt19937_64 gen(5005);
  std::uniform_int_distribution<int> cells(4, 64), ng(0, 3200), ch(1, 4), tile(4, 32);
  std::uniform_real_distribution<double> cell(0.1, 0.4);
  double worst = 0.0, equiv = 0.0, linear = 0.0;
  for (int t = 0; t < 100; ++t) {
    rags::SplatConfig cfg;
    cfg.grid = rags::BevGeometry{Vec2(-3.0, 1.5), cell(gen), cells(gen), cells(gen)};
    cfg.tile_size = tile(gen);
    const auto field = rags::random_field(static_cast<std::size_t>(ng(gen)), ch(gen), cfg.grid,
                                          static_cast<std::uint64_t>(t), 0.05, 0.6);
    const auto tiled = rags::rasterize(field, cfg);
    worst = std::max(worst, fixture::max_abs_diff(tiled.data(), oracle::rasterize(field, cfg.grid, cfg.cutoff_sigma)));

    if (t % 10 == 0) {
      auto moved = field;
      const Vec2 shift(2.0 * cfg.grid.cell_size, -3.0 * cfg.grid.cell_size);
      for (auto& p : moved.positions) p.head<2>() += shift;
      auto shifted = cfg;
      shifted.grid.origin += shift;
      equiv = std::max(equiv, fixture::max_abs_diff(rags::rasterize(moved, shifted).data(), tiled.data()));

      auto scaled = field;
      scaled.features *= -1.5;
      const auto b = rags::rasterize(scaled, cfg);
      for (std::size_t i = 0; i < b.data().size(); ++i) {
        linear = std::max(linear, std::abs(b.data()[i] + 1.5 * tiled.data()[i]));
      }
    }
  }
  const bool ok = worst <= kRasterTol && equiv <= kRasterTol && linear <= kRasterTol;
  return {ok ? Status::kPass : Status::kFail, "100 scenes, oracle max abs diff " + num(worst) +
                                                  ", translation " + num(equiv) + ", linearity " + num(linear)};
}

Verdict ac6_gradients() {
  double pos = 0.0, scale = 0.0, opa = 0.0, feat = 0.0;
  std::size_t dead = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    rags::SplatConfig cfg;
    cfg.grid = rags::BevGeometry{Vec2(-2.0, -2.0), 0.25, 24, 24};
    const auto field = rags::random_field(6 + s % 5, 3, cfg.grid, 6000 + s, 0.3, 0.9);
    const auto e = oracle::raster_grad_errors(field, cfg, 7000 + s);
    pos = std::max(pos, e.position);
    scale = std::max(scale, e.scale);
    opa = std::max(opa, e.opacity);
    feat = std::max(feat, e.feature);
    if (e.live_cells == 0) ++dead;
  }
  const bool ok = pos < kGradRelTol && scale < kGradRelTol && opa < kGradRelTol && feat < kGradRelTol && dead == 0;
  return {ok ? Status::kPass : Status::kFail, "20 scenes, rel err position " + num(pos) + ", scale " + num(scale) +
                                                  ", opacity " + num(opa) + ", feature " + num(feat)};
}

double best_ms(const std::function<void()>& body, int repeats) {
  double best = std::numeric_limits<double>::infinity();
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    body();
    best = std::min(best, 1000.0 * seconds_since(t0));
  }
  return best;
}

Verdict ac7_performance() {
  rags::SplatConfig cfg;
  cfg.grid = rags::BevGeometry{Vec2(0.0, -25.6), 0.32, 160, 160};
  const auto field = rags::random_field(12800, 32, cfg.grid, 7);
  rags::BevGrid out;
  cfg.threads = 1;
  const double single = best_ms([&] { out = rags::rasterize(field, cfg); }, 3);
  const bool fast = single < kRasterBudgetMs;
  std::string detail = "N=12800, 160x160x32, single-thread " + num(single) + " ms";
  const unsigned hw = std::thread::hardware_concurrency();
  if (hw < 4) {
    detail += "; 4-thread speedup not measurable on " + std::to_string(hw) + " hardware thread(s)";
    return {fast ? Status::kSkip : Status::kFail, detail};
  }
  cfg.threads = 4;
  const double four = best_ms([&] { out = rags::rasterize(field, cfg); }, 3);
  const double speedup = single / four;
  detail += ", 4 threads " + num(four) + " ms, speedup " + num(speedup) + "x";
  return {fast && speedup >= kSpeedupTarget / kSpeedupSlack ? Status::kPass : Status::kFail, detail};
}

Verdict ac8_losses() {
  const bool exact = rags::total_loss(1.0, 0.0, 0.0) == 1.0 && rags::total_loss(0.0, 1.0, 1.0) == 0.2 &&
                     rags::total_loss(2.0, 0.5, 0.5) == 2.1 && rags::total_loss(0.0, 3.0, 0.0) == 0.1 * 3.0 &&
                     rags::LossWeights{}.lambda_aux == 0.1;
  rags::SceneSpec spec;
  spec.seed = 0;
  const auto scene = rags::generate_scene(spec);
  const auto result = rags::run_pipeline(scene, rags::desk_config());
  const auto losses = rags::smoke_descent(result.rounds.back(), scene.camera, scene.gt_depth, 200);
  const auto ma = rags::moving_average(losses, 10);
  std::size_t rises = 0;
  for (std::size_t i = 1; i < ma.size(); ++i) rises += ma[i] > ma[i - 1] ? 1 : 0;
  const bool ok = exact && losses.size() == 200 && rises == 0 && losses.back() < losses.front();
  return {ok ? Status::kPass : Status::kFail,
          std::string("analytic cases exact: ") + (exact ? "yes" : "no") + ", descent " + num(losses.front()) +
              " -> " + num(losses.back()) + ", moving-average rises " + std::to_string(rises)};
}

rags::Box3D rect(double x, double y, double l = 1.0, double w = 1.0, double yaw = 0.0) {
  rags::Box3D b;
  b.center = Vec3(x, y, 0.0);
  b.size = Vec3(l, w, 1.0);
  b.yaw = yaw;
  return b;
}

Verdict ac9_metrics() {
  std::mt19937_64 gen(9009);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const auto a = rect(0.0, 0.0, 0.5 + 3.0 * u(gen), 0.5 + 2.0 * u(gen), (2 * u(gen) - 1) * std::numbers::pi);
    const auto b = rect(2.0 * u(gen) - 1.0, 2.0 * u(gen) - 1.0, 0.5 + 3.0 * u(gen), 0.5 + 2.0 * u(gen),
                        (2 * u(gen) - 1) * std::numbers::pi);
    worst = std::max(worst, std::abs(rags::rotated_iou_bev(a, b) -
                                     oracle::monte_carlo_iou(a, b, kIouSide, static_cast<std::uint64_t>(t))));
  }

  const auto d = [](const rags::Box3D& b, double s) { return rags::Detection{b, s, 0}; };
  const std::vector<rags::Box3D> two{rect(0, 0), rect(10, 0)};
  const std::vector<rags::Box3D> three{rect(0, 0), rect(10, 0), rect(20, 0)};
  struct Case {
    std::vector<rags::Detection> dets;
    std::vector<rags::Box3D> gts;
    double expect;
  };
  // Expected values enumerate the PR points by hand: sum of recall steps times
  // the best precision at or beyond each step.
  const std::vector<Case> cases{
      {{d(rect(0, 0), 0.9), d(rect(10, 0), 0.8)}, two, 0.5 * 1.0 + 0.5 * 1.0},
      {{}, two, 0.0},
      {{d(rect(0, 0), 0.9), d(rect(50, 0), 0.8), d(rect(10, 0), 0.7)}, two, 0.5 * 1.0 + 0.5 * (2.0 / 3.0)},
      {{d(rect(50, 0), 0.9), d(rect(0, 0), 0.8), d(rect(10, 0), 0.7)}, two, 0.5 * (2.0 / 3.0) + 0.5 * (2.0 / 3.0)},
      {{d(rect(0, 0), 0.9), d(rect(10, 0), 0.8), d(rect(60, 0), 0.7), d(rect(70, 0), 0.6)},
       three,
       (1.0 / 3.0) * 1.0 + (2.0 / 3.0 - 1.0 / 3.0) * 1.0},
  };
  int exact = 0;
  for (const auto& c : cases) exact += rags::average_precision(c.dets, c.gts, 0.5, 0) == c.expect ? 1 : 0;
  const bool ok = worst <= kIouTol && exact == 5;
  return {ok ? Status::kPass : Status::kFail,
          "100 IoU pairs, max |IoU - MC| " + num(worst) + ", AP cases exact " + std::to_string(exact) + "/5"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Verdict ac10_determinism() {
  const fs::path root = fs::temp_directory_path() / "rags_acceptance_runs";
  fs::remove_all(root);
  rags::cli::RunOptions opts;
  opts.seed = 10;
  opts.threads = 1;
  std::ostringstream sink;
  double worst = 0.0;
  for (const char* name : {"a", "b"}) {
    opts.out = root / name;
    const auto t0 = std::chrono::steady_clock::now();
    rags::cli::cmd_run(opts, sink);
    worst = std::max(worst, seconds_since(t0));
  }
  std::size_t files = 0, differ = 0;
  for (const auto& e : fs::directory_iterator(root / "a")) {
    ++files;
    const fs::path twin = root / "b" / e.path().filename();
    if (!fs::exists(twin) || slurp(e.path()) != slurp(twin)) ++differ;
  }
  std::size_t files_b = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(root / "b")) ++files_b;
  fs::remove_all(root);
  const auto cfg = rags::desk_config();
  const bool desk = cfg.init.n_total == 512 && cfg.ima.num_iterations == 3 && cfg.splat.levels == 2;
  const bool ok = desk && files > 0 && files == files_b && differ == 0 && worst < kPipelineSeconds;
  return {ok ? Status::kPass : Status::kFail, std::to_string(files) + " files, " + std::to_string(differ) +
                                                  " differ, slowest run " + num(worst) + " s (N=512, M=3, L=2)"};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    Verdict (*run)();
  };
  const Criterion criteria[] = {
      {"geometry round-trips", ac1_geometry},     {"initialization budget", ac2_budget},
      {"deformable attention", ac3_dca},          {"sparse fusion", ac4_sparse},
      {"rasterizer oracle", ac5_raster},          {"rasterizer gradients", ac6_gradients},
      {"rasterizer performance", ac7_performance}, {"loss composition", ac8_losses},
      {"metrics", ac9_metrics},                   {"end-to-end determinism", ac10_determinism},
  };
  int failed = 0;
  int index = 0;
  for (const auto& c : criteria) {
    ++index;
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {Status::kFail, std::string("threw: ") + e.what()};
    }
    const char* tag = v.status == Status::kPass ? "PASS" : (v.status == Status::kSkip ? "SKIP" : "FAIL");
    if (v.status == Status::kFail) ++failed;
    std::printf("[%s] AC%d %s: %s\n", tag, index, c.name, v.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
