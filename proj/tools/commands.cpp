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

#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "rags/config.hpp"
#include "rags/errors.hpp"
#include "rags/eval.hpp"
#include "rags/pipeline.hpp"
#include "rags/scene.hpp"
#include "rags/splat.hpp"
#include "rags/tensor_io.hpp"

namespace rags::cli {

namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

constexpr double kBenchTolerance = 1e-12;
constexpr std::size_t kNaiveLimit = 3200;
constexpr const char* kClassNames[] = {"car", "pedestrian", "cyclist"};

std::string class_name(int id) {
  return id >= 0 && id < kNumClasses ? kClassNames[id] : "class" + std::to_string(id);
}

std::string read_text(const fs::path& path) {
  const auto bytes = read_file(path);
  return std::string(bytes.begin(), bytes.end());
}

void write_text(const fs::path& path, const std::string& text) {
  write_file(path, std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error("cannot create output directory " + dir.string());
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

Tensor positions_tensor(const std::vector<Vec3>& p) {
  Tensor t({p.size(), 3});
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t k = 0; k < 3; ++k) t(i, k) = p[i][static_cast<Eigen::Index>(k)];
  }
  return t;
}

Tensor grid_to_2d(const BevGrid& g) {
  return Tensor({static_cast<std::size_t>(g.nx()), static_cast<std::size_t>(g.ny())}, g.data());
}

// Writes tensors in the chosen format and records name/shape lines for the report.
class DumpWriter {
 public:
  DumpWriter(fs::path dir, std::string format, std::size_t channel)
      : dir_(std::move(dir)), format_(std::move(format)), channel_(channel) {}

  void write(const std::string& name, const Tensor& t) {
    if (!t.all_finite()) throw Error("tensor " + name + " contains non-finite values");
    if (format_ == "csv") {
      save_csv(dir_ / (name + ".csv"), t, t.rank() == 3 ? channel_ : 0);
    } else {
      const fs::path path = dir_ / (name + ".rags");
      save_tensor(path, t);
      if (!(load_tensor(path) == round_to_float32(t))) throw Error("tensor " + name + " does not round-trip");
    }
    lines_.push_back(name + "  " + t.shape_string());
  }

  const std::vector<std::string>& lines() const { return lines_; }

 private:
  fs::path dir_;
  std::string format_;
  std::size_t channel_;
  std::vector<std::string> lines_;
};

void check_field(const GaussianField& f, const std::string& name) {
  try {
    f.validate();
  } catch (const Error& e) {
    throw Error(name + " violates field invariants: " + e.what());
  }
}

void check_render(const DepthRender& r) {
  for (std::size_t i = 0; i < r.depth.size(); ++i) {
    if (!(r.depth[i] >= 0.0) || !(r.alpha[i] >= 0.0) || !(r.alpha[i] <= 1.0 + 1e-12)) {
      throw Error("depth render violates 0 <= alpha <= 1 or depth >= 0");
    }
  }
}

template <class F>
double best_of_ms(int repeats, F&& body) {
  double best = 0.0;
  for (int r = 0; r < std::max(repeats, 1); ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    body();
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    if (r == 0 || ms < best) best = ms;
  }
  return best;
}

}  // namespace

void cmd_synth(const SynthOptions& options, std::ostream& log) {
  SceneSpec spec;
  int count = 1;
  if (options.spec) {
    Json j;
    const std::string text = read_text(*options.spec);
    try {
      j = Json::parse(text);
    } catch (const Json::parse_error& e) {
      throw ParseError("", 0, e.what());
    }
    try {
      count = j.value("count", count);
      spec.seed = j.value("seed", spec.seed);
      spec.num_boxes = j.value("num_boxes", spec.num_boxes);
      spec.radar_per_box = j.value("radar_per_box", spec.radar_per_box);
      spec.clutter_ratio = j.value("clutter_ratio", spec.clutter_ratio);
    } catch (const Json::exception& e) {
      throw ParseError("", 0, e.what());
    }
  }
  if (options.count) count = *options.count;
  if (options.seed) spec.seed = *options.seed;
  if (count < 0) throw InvalidArgument("count must be non-negative");
  ensure_dir(options.out);

  const std::uint64_t base = spec.seed;
  Json entries = Json::array();
  for (int k = 0; k < count; ++k) {
    spec.seed = base + static_cast<std::uint64_t>(k);
    const Scene scene = generate_scene(spec);
    char name[32];
    std::snprintf(name, sizeof(name), "scene_%04d.json", k);
    save_scene(options.out / name, scene);
    entries.push_back({{"index", k},
                       {"seed", spec.seed},
                       {"path", name},
                       {"boxes", scene.boxes.size()},
                       {"radar_points", scene.radar.points.size()}});
    log << "wrote " << name << " (seed " << spec.seed << ", " << scene.boxes.size() << " boxes)\n";
  }
  const Json manifest{{"count", count}, {"scenes", entries}};
  write_text(options.out / "manifest.json", manifest.dump(2) + "\n");
}

void cmd_run(const RunOptions& options, std::ostream& log) {
  PipelineConfig config = options.config ? load_config(*options.config) : desk_config();
  if (options.seed) config.seed = *options.seed;
  if (options.threads) config.splat.threads = *options.threads;
  config.validate();
  if (options.format != "rags" && options.format != "csv") throw InvalidArgument("format must be rags or csv");

  Scene scene;
  std::string scene_label;
  if (options.scene) {
    scene = load_scene(*options.scene);
    scene_label = options.scene->filename().string();
  } else {
    SceneSpec spec;
    spec.seed = config.seed;
    scene = generate_scene(spec);
    scene_label = "generated (seed " + std::to_string(config.seed) + ")";
  }
  ensure_dir(options.out);

  const PipelineResult r = run_pipeline(scene, config);

  check_field(r.init, "init field");
  for (std::size_t m = 0; m < r.rounds.size(); ++m) check_field(r.rounds[m], "round " + std::to_string(m + 1));
  for (const auto& l : r.levels) {
    if (!l.all_finite()) throw Error("BEV level contains non-finite values");
  }
  check_render(r.depth);

  DumpWriter dump(options.out, options.format, options.channel);
  dump.write("init_positions", positions_tensor(r.init_positions));
  for (std::size_t m = 0; m < r.rounds.size(); ++m) {
    dump.write("field_round" + std::to_string(m + 1), field_to_tensor(r.rounds[m]));
    dump.write("positions_round" + std::to_string(m + 1), positions_tensor(r.rounds[m].positions));
  }
  for (std::size_t l = 0; l < r.levels.size(); ++l) dump.write("bev_level" + std::to_string(l + 1), r.levels[l].to_tensor());
  dump.write("f_gs", r.f_gs.to_tensor());
  dump.write("f_bev", r.f_bev.to_tensor());
  dump.write("bev_seg_logits", grid_to_2d(r.seg_logits));
  dump.write("depth_render", r.depth.depth);
  dump.write("alpha_render", r.depth.alpha);

  std::vector<double> descent;
  if (options.descent_steps > 0) {
    descent = smoke_descent(r.rounds.back(), scene.camera, scene.gt_depth, options.descent_steps);
    dump.write("descent_loss", Tensor({descent.size()}, descent));
  }

  std::ostringstream report;
  report << "rags run report\n";
  report << "scene: " << scene_label << "\n";
  report << "seed: " << config.seed << "\n";
  report << "gaussians (N): " << r.init.size() << "\n";
  report << "feature width (C): " << config.feature_width << "\n";
  report << "aggregation rounds (M): " << r.rounds.size() << "\n";
  report << "BEV levels (L): " << r.levels.size() << "\n";
  report << "radar pillars: " << r.pillars.size() << "\n";
  report << "format: " << options.format << "\n";
  report << "tensors:\n";
  for (const auto& line : dump.lines()) report << "  " << line << "\n";
  report << "invariants: ok\n";
  report << "losses:\n";
  report << "  depth_render_l1: " << fmt(r.depth_render_loss) << "\n";
  report << "  seg_render_bce: " << fmt(r.seg_render_loss) << "\n";
  report << "  det: " << fmt(r.det_loss) << "\n";
  report << "  lambda_aux: " << fmt(config.loss.lambda_aux) << "\n";
  report << "  total: " << fmt(r.total_loss) << "\n";
  if (!descent.empty()) {
    report << "descent:\n";
    report << "  steps: " << descent.size() << "\n";
    report << "  first: " << fmt(descent.front()) << "\n";
    report << "  last: " << fmt(descent.back()) << "\n";
  }
  write_text(options.out / "report.txt", report.str());

  log << report.str();
  log << "timings (ms):\n";
  double total = 0.0;
  for (const auto& t : r.timings) {
    log << "  " << t.stage << ": " << std::fixed << std::setprecision(3) << t.milliseconds << "\n";
    total += t.milliseconds;
  }
  log << "  total: " << total << "\n" << std::defaultfloat;
}

void cmd_rasterize(const RasterizeOptions& options, std::ostream& log) {
  PipelineConfig config = options.config ? load_config(*options.config) : desk_config();
  if (options.threads) config.splat.threads = *options.threads;
  config.validate();
  const GaussianField field = field_from_tensor(load_tensor(options.field));
  field.validate();
  RasterStats stats;
  const BevGrid grid = rasterize(field, config.splat, &stats);
  const Tensor t = grid.to_tensor();
  if (options.format == "csv") {
    save_csv(options.out, t, options.channel);
  } else if (options.format == "rags") {
    save_tensor(options.out, t);
  } else {
    throw InvalidArgument("format must be rags or csv");
  }
  std::size_t busiest = 0;
  for (std::size_t n : stats.gaussians_per_tile) busiest = std::max(busiest, n);
  log << "rasterized " << field.size() << " Gaussians into " << t.shape_string() << "\n";
  log << "tiles: " << stats.tiles_x << "x" << stats.tiles_y << ", max Gaussians per tile: " << busiest
      << ", pairs evaluated: " << stats.pairs_evaluated << ", cells written: " << stats.cells_written << "\n";
}

void cmd_eval(const EvalOptions& options, std::ostream& log) {
  const auto dets = detections_from_text(read_text(options.detections));
  const Scene scene = load_scene(options.scene);
  const EvalReport report = evaluate(dets, scene.boxes, options.thresholds);

  std::ostringstream text;
  Json classes = Json::array();
  for (const auto& c : report.classes) {
    text << class_name(c.class_id) << ": AP " << fmt(c.ap) << " (IoU >= " << c.iou_thresh << ", " << c.num_gt
         << " gt, " << c.num_det << " det)\n";
    classes.push_back({{"class_id", c.class_id},
                       {"name", class_name(c.class_id)},
                       {"ap", c.ap},
                       {"iou_thresh", c.iou_thresh},
                       {"num_gt", c.num_gt},
                       {"num_det", c.num_det}});
  }
  text << "mAP: " << fmt(report.map) << "\n";
  log << text.str();
  if (options.out) {
    ensure_dir(*options.out);
    write_text(*options.out / "metrics.txt", text.str());
    write_text(*options.out / "metrics.json", Json{{"classes", classes}, {"map", report.map}}.dump(2) + "\n");
  }
}

void cmd_bench(const BenchOptions& options, std::ostream& log) {
  log << std::left << std::setw(8) << "N" << std::setw(10) << "grid" << std::setw(12) << "tiled_ms"
      << std::setw(12) << "naive_ms" << std::setw(14) << "max_abs_diff" << "pairs\n";
  for (std::size_t n : options.sizes) {
    const int cells = n <= 512 ? 40 : (n <= 3200 ? 80 : 160);
    SplatConfig cfg;
    cfg.grid = BevGeometry{Vec2(0.0, -0.5 * cells * 0.32), 0.32, cells, cells};
    cfg.threads = options.threads;
    const GaussianField field = random_field(n, options.channels, cfg.grid, options.seed);
    RasterStats stats;
    BevGrid tiled;
    const double tiled_ms = best_of_ms(options.repeats, [&] { tiled = rasterize(field, cfg, &stats); });
    std::ostringstream naive_ms;
    std::ostringstream diff_text;
    naive_ms << std::setprecision(4);
    if (n <= kNaiveLimit) {
      BevGrid naive;
      naive_ms << best_of_ms(1, [&] { naive = rasterize_naive(field, cfg); });
      double diff = 0.0;
      for (std::size_t i = 0; i < tiled.data().size(); ++i) {
        diff = std::max(diff, std::abs(tiled.data()[i] - naive.data()[i]));
      }
      diff_text << diff;
      if (!(diff <= kBenchTolerance)) {
        throw Error("tiled and naive rasterizers differ by " + diff_text.str() + " at N=" + std::to_string(n));
      }
    } else {
      naive_ms << "-";
      diff_text << "-";
    }
    std::ostringstream grid;
    grid << cells << "x" << cells;
    log << std::setw(8) << n << std::setw(10) << grid.str() << std::setw(12) << std::setprecision(4) << tiled_ms
        << std::setw(12) << naive_ms.str() << std::setw(14) << diff_text.str() << stats.pairs_evaluated << "\n";
  }
}

int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"rags: radar-camera Gaussian splatting toolkit"};
  app.require_subcommand(1);

  SynthOptions synth;
  int synth_count = 1;
  std::uint64_t synth_seed = 0;
  std::string synth_spec;
  auto* s = app.add_subcommand("synth", "Generate synthetic scenes and a manifest");
  s->add_option("--out", synth.out, "Output directory")->required();
  auto* s_spec = s->add_option("--config,--spec", synth_spec, "Scene spec file (JSON)");
  auto* s_count = s->add_option("--count", synth_count, "Number of scenes")->check(CLI::NonNegativeNumber);
  auto* s_seed = s->add_option("--seed", synth_seed, "Seed of the first scene");

  RunOptions run;
  std::string run_config;
  std::string run_scene;
  std::uint64_t run_seed = 0;
  int run_threads = 1;
  auto* r = app.add_subcommand("run", "Run the full pipeline and dump every intermediate");
  auto* r_config = r->add_option("--config", run_config, "Pipeline config (JSON)");
  auto* r_scene = r->add_option("--scene", run_scene, "Scene file; generated from the seed when omitted");
  auto* r_seed = r->add_option("--seed", run_seed, "Overrides the config seed");
  r->add_option("--out", run.out, "Output directory")->required();
  auto* r_threads = r->add_option("--threads", run_threads, "Worker threads")->check(CLI::PositiveNumber);
  r->add_option("--format", run.format, "Dump format")->check(CLI::IsMember({"rags", "csv"}));
  r->add_option("--channel", run.channel, "Channel exported for rank-3 tensors in CSV");
  r->add_option("--descent", run.descent_steps, "Smoke descent steps on opacities")->check(CLI::Range(0, 200));

  RasterizeOptions ras;
  std::string ras_config;
  int ras_threads = 1;
  auto* z = app.add_subcommand("rasterize", "Rasterize a packed Gaussian field into a BEV grid");
  z->add_option("--field", ras.field, "Packed N x (11 + C) field container")->required();
  auto* z_config = z->add_option("--config", ras_config, "Pipeline config (JSON) providing the grid");
  z->add_option("--out", ras.out, "Output file")->required();
  auto* z_threads = z->add_option("--threads", ras_threads, "Worker threads")->check(CLI::PositiveNumber);
  z->add_option("--format", ras.format, "Output format")->check(CLI::IsMember({"rags", "csv"}));
  z->add_option("--channel", ras.channel, "Channel exported in CSV");

  EvalOptions ev;
  std::string ev_out;
  auto* e = app.add_subcommand("eval", "Evaluate detections against a scene");
  e->add_option("--dets", ev.detections, "Detections file (JSON)")->required();
  e->add_option("--scene", ev.scene, "Scene file")->required();
  e->add_option("--iou", ev.thresholds, "IoU threshold per class (car, pedestrian, cyclist)")->delimiter(',');
  auto* e_out = e->add_option("--out", ev_out, "Directory for metrics.txt and metrics.json");

  BenchOptions bench;
  auto* b = app.add_subcommand("bench", "Tiled vs naive rasterizer timing");
  b->add_option("--sizes", bench.sizes, "Gaussian counts")->delimiter(',');
  b->add_option("--threads", bench.threads, "Worker threads")->check(CLI::PositiveNumber);
  b->add_option("--repeats", bench.repeats, "Timing repeats")->check(CLI::PositiveNumber);
  b->add_option("--seed", bench.seed, "Field seed");
  b->add_option("--channels", bench.channels, "Feature channels")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    if (s->parsed()) {
      if (*s_spec) synth.spec = synth_spec;
      if (*s_count) synth.count = synth_count;
      if (*s_seed) synth.seed = synth_seed;
      cmd_synth(synth, out);
    } else if (r->parsed()) {
      if (*r_config) run.config = run_config;
      if (*r_scene) run.scene = run_scene;
      if (*r_seed) run.seed = run_seed;
      if (*r_threads) run.threads = run_threads;
      cmd_run(run, out);
    } else if (z->parsed()) {
      if (*z_config) ras.config = ras_config;
      if (*z_threads) ras.threads = ras_threads;
      cmd_rasterize(ras, out);
    } else if (e->parsed()) {
      if (*e_out) ev.out = ev_out;
      cmd_eval(ev, out);
    } else if (b->parsed()) {
      cmd_bench(bench, out);
    }
  } catch (const ConfigError& ex) {
    err << "error: " << ex.what() << "\n";
    return kUsageError;
  } catch (const ParseError& ex) {
    err << "error: " << ex.what() << "\n";
    return kUsageError;
  } catch (const InvalidArgument& ex) {
    err << "error: " << ex.what() << "\n";
    return kUsageError;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return kRuntimeError;
  }
  return kOk;
}

}  // namespace rags::cli
