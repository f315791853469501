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
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace rags::cli {

enum ExitCode : int { kOk = 0, kUsageError = 1, kRuntimeError = 2 };

struct SynthOptions {
  std::filesystem::path out;
  std::optional<std::filesystem::path> spec;
  std::optional<int> count;
  std::optional<std::uint64_t> seed;
};

struct RunOptions {
  std::optional<std::filesystem::path> config;
  std::optional<std::filesystem::path> scene;  // generated from the seed when absent
  std::optional<std::uint64_t> seed;
  std::filesystem::path out;
  std::optional<int> threads;
  std::string format = "rags";
  std::size_t channel = 0;  // CSV slice of rank-3 tensors
  int descent_steps = 0;
};

struct RasterizeOptions {
  std::filesystem::path field;
  std::optional<std::filesystem::path> config;
  std::filesystem::path out;
  std::optional<int> threads;
  std::string format = "rags";
  std::size_t channel = 0;
};

struct EvalOptions {
  std::filesystem::path detections;
  std::filesystem::path scene;
  std::vector<double> thresholds{0.5, 0.25, 0.25};
  std::optional<std::filesystem::path> out;
};

struct BenchOptions {
  std::vector<std::size_t> sizes{512, 3200, 12800};
  int threads = 1;
  int repeats = 3;
  int channels = 32;
  std::uint64_t seed = 0;
};

// Each command writes human-readable progress to `log` and throws rags::Error on failure.
void cmd_synth(const SynthOptions& options, std::ostream& log);
void cmd_run(const RunOptions& options, std::ostream& log);
void cmd_rasterize(const RasterizeOptions& options, std::ostream& log);
void cmd_eval(const EvalOptions& options, std::ostream& log);
void cmd_bench(const BenchOptions& options, std::ostream& log);

// Parses argv and dispatches; returns the process exit code.
int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace rags::cli
