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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "rags/eval.hpp"
#include "rags/scene.hpp"
#include "rags/tensor_io.hpp"

namespace {

namespace fs = std::filesystem;

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "rags");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  Outcome o;
  o.code = rags::cli::main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
  o.out = out.str();
  o.err = err.str();
  return o;
}

fs::path fresh(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("rags_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

TEST(CliSynth, SingleScene) {
  const auto dir = fresh("synth1");
  const auto o = invoke({"synth", "--out", dir.string(), "--count", "1", "--seed", "7"});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_TRUE(fs::exists(dir / "manifest.json"));
  ASSERT_TRUE(fs::exists(dir / "scene_0000.json"));
  const auto s = rags::load_scene(dir / "scene_0000.json");
  EXPECT_EQ(s.seed, 7u);
  EXPECT_FALSE(s.boxes.empty());
}

TEST(CliSynth, TenScenesReproducible) {
  const auto a = fresh("synth10a"), b = fresh("synth10b");
  ASSERT_EQ(invoke({"synth", "--out", a.string(), "--count", "10"}).code, 0);
  ASSERT_EQ(invoke({"synth", "--out", b.string(), "--count", "10"}).code, 0);
  for (int k = 0; k < 10; ++k) {
    char name[32];
    std::snprintf(name, sizeof(name), "scene_%04d.json", k);
    ASSERT_TRUE(fs::exists(a / name));
    EXPECT_EQ(slurp(a / name), slurp(b / name));
  }
  EXPECT_EQ(slurp(a / "manifest.json"), slurp(b / "manifest.json"));
  EXPECT_NE(slurp(a / "scene_0000.json"), slurp(a / "scene_0001.json"));
}

TEST(CliRun, DumpsAndRepeatsByteForByte) {
  const auto a = fresh("runa"), b = fresh("runb");
  const auto oa = invoke({"run", "--seed", "3", "--out", a.string()});
  ASSERT_EQ(oa.code, 0) << oa.err;
  ASSERT_EQ(invoke({"run", "--seed", "3", "--out", b.string()}).code, 0);
  EXPECT_NE(oa.out.find("timings (ms)"), std::string::npos);
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    ++files;
    EXPECT_EQ(slurp(e.path()), slurp(b / e.path().filename())) << e.path();
  }
  EXPECT_GE(files, 10u);
  const auto report = slurp(a / "report.txt");
  EXPECT_NE(report.find("invariants: ok"), std::string::npos);
  EXPECT_EQ(report.find("timings"), std::string::npos);
  const auto f = rags::load_tensor(a / "field_round3.rags");
  EXPECT_EQ(f.shape(), (std::vector<std::size_t>{512, 11 + 32}));
}

TEST(CliRun, CsvAndDescent) {
  const auto dir = fresh("runcsv");
  const auto o = invoke({"run", "--out", dir.string(), "--format", "csv", "--descent", "5"});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_TRUE(fs::exists(dir / "depth_render.csv"));
  EXPECT_TRUE(fs::exists(dir / "descent_loss.csv"));
  EXPECT_NE(slurp(dir / "report.txt").find("steps: 5"), std::string::npos);
}

TEST(CliRun, LevelsBeyondRoundsIsUsageError) {
  const auto dir = fresh("runbad");
  write(dir / "bad.json", R"({"ima": {"num_iterations": 2}, "splat": {"levels": 3}})");
  const auto o = invoke({"run", "--config", (dir / "bad.json").string(), "--out", (dir / "out").string()});
  EXPECT_EQ(o.code, 1);
  EXPECT_NE(o.err.find("L ≤ M"), std::string::npos) << o.err;
}

TEST(CliRun, MissingSceneIsRuntimeError) {
  const auto dir = fresh("runmissing");
  const auto o = invoke({"run", "--scene", (dir / "nope.json").string(), "--out", dir.string()});
  EXPECT_EQ(o.code, 2);
}

TEST(CliRasterize, PackedField) {
  const auto dir = fresh("raster");
  ASSERT_EQ(invoke({"run", "--out", dir.string()}).code, 0);
  const auto o = invoke({"rasterize", "--field", (dir / "field_round3.rags").string(), "--out",
                         (dir / "bev.rags").string()});
  ASSERT_EQ(o.code, 0) << o.err;
  const auto bev = rags::load_tensor(dir / "bev.rags");
  const auto level = rags::load_tensor(dir / "bev_level2.rags");
  EXPECT_EQ(bev.shape(), level.shape());
}

TEST(CliEval, PerfectDetections) {
  const auto dir = fresh("eval");
  ASSERT_EQ(invoke({"synth", "--out", dir.string(), "--count", "1", "--seed", "11"}).code, 0);
  const auto scene = rags::load_scene(dir / "scene_0000.json");
  std::vector<rags::Detection> dets;
  for (const auto& b : scene.boxes) dets.push_back({b, 0.9, b.class_id});
  write(dir / "dets.json", rags::detections_to_text(dets));
  const auto o = invoke({"eval", "--dets", (dir / "dets.json").string(), "--scene",
                         (dir / "scene_0000.json").string(), "--out", dir.string()});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_NE(o.out.find("mAP"), std::string::npos) << o.out;
  EXPECT_TRUE(fs::exists(dir / "metrics.json"));
  EXPECT_NE(slurp(dir / "metrics.json").find("\"map\": 1.0"), std::string::npos);

  write(dir / "broken.json", R"({"detections": [{"center": [0, 0, 0]}]})");
  EXPECT_EQ(invoke({"eval", "--dets", (dir / "broken.json").string(), "--scene",
                    (dir / "scene_0000.json").string()})
                .code,
            1);
}

TEST(CliBench, SmallSizes) {
  const auto o = invoke({"bench", "--sizes", "64,128", "--repeats", "1", "--channels", "4"});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_NE(o.out.find("tiled_ms"), std::string::npos);
}

TEST(CliUsage, Errors) {
  EXPECT_EQ(invoke({"frobnicate"}).code, 1);
  EXPECT_EQ(invoke({"synth"}).code, 1);
  EXPECT_EQ(invoke({"run", "--out", "/tmp/x", "--format", "xml"}).code, 1);
  EXPECT_EQ(invoke({"run", "--out", "/tmp/x", "--threads", "0"}).code, 1);
  EXPECT_EQ(invoke({"--help"}).code, 0);
}

}  // namespace
