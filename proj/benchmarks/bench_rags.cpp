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

#include <benchmark/benchmark.h>

#include "rags/config.hpp"
#include "rags/ima.hpp"
#include "rags/pipeline.hpp"
#include "rags/scene.hpp"
#include "rags/splat.hpp"

namespace {

rags::SplatConfig grid_for(int cells, int threads) {
  rags::SplatConfig cfg;
  cfg.grid = rags::BevGeometry{rags::Vec2(0.0, -0.5 * cells * 0.32), 0.32, cells, cells};
  cfg.threads = threads;
  return cfg;
}

void BM_RasterizeTiled(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto cfg = grid_for(static_cast<int>(state.range(1)), static_cast<int>(state.range(2)));
  const auto field = rags::random_field(n, 32, cfg.grid, 1);
  for (auto _ : state) benchmark::DoNotOptimize(rags::rasterize(field, cfg));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_RasterizeTiled)
    ->Args({512, 40, 1})
    ->Args({3200, 80, 1})
    ->Args({12800, 160, 1})
    ->Args({12800, 160, 2})
    ->Args({12800, 160, 4})
    ->Unit(benchmark::kMillisecond);

void BM_RasterizeNaive(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto cfg = grid_for(static_cast<int>(state.range(1)), 1);
  const auto field = rags::random_field(n, 32, cfg.grid, 1);
  for (auto _ : state) benchmark::DoNotOptimize(rags::rasterize_naive(field, cfg));
}
BENCHMARK(BM_RasterizeNaive)->Args({512, 40})->Args({3200, 80})->Unit(benchmark::kMillisecond);

void BM_SparseFuse(benchmark::State& state) {
  const auto scene = rags::generate_scene(rags::SceneSpec{});
  const auto config = rags::desk_config();
  const auto field = rags::random_field(static_cast<std::size_t>(state.range(0)), config.feature_width,
                                        config.splat.grid, 2);
  const auto pillars = rags::pillarize(scene.radar, config.splat.grid, config.feature_width, 3);
  const auto spec = config.voxel_grid();
  const auto radar = rags::replicate_pillars(pillars, spec.nz, spec.nx, spec.ny);
  const auto w = rags::SparseConv3d::seeded(config.feature_width, config.feature_width, 4);
  for (auto _ : state) benchmark::DoNotOptimize(rags::sparse_fuse(field, radar, w, spec));
}
BENCHMARK(BM_SparseFuse)->Arg(512)->Arg(3200)->Unit(benchmark::kMillisecond);

void BM_Pipeline(benchmark::State& state) {
  const auto scene = rags::generate_scene(rags::SceneSpec{});
  const auto config = rags::desk_config();
  for (auto _ : state) benchmark::DoNotOptimize(rags::run_pipeline(scene, config));
  state.counters["fps"] = benchmark::Counter(static_cast<double>(state.iterations()), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_Pipeline)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
