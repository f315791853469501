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
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "rags/tensor.hpp"

namespace rags {

enum class Activation { kNone, kRelu, kSigmoid };

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
  Activation activation = Activation::kNone;
};

// Chain of affine + activation layers. Stand-in for the learned MLP and
// projection blocks; weights come from a seed, never from training.
class DenseStack {
 public:
  DenseStack() = default;
  explicit DenseStack(std::vector<DenseLayer> layers, std::uint64_t seed = 0);

  // widths = {in, hidden..., out}; activations has widths.size() - 1 entries.
  // Weights and biases are uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
  static DenseStack seeded(std::span<const int> widths, std::span<const Activation> activations,
                           std::uint64_t seed);
  static DenseStack zeros(std::span<const int> widths, std::span<const Activation> activations);

  Eigen::VectorXd forward(const Eigen::VectorXd& input) const;
  // One sample per row.
  Eigen::MatrixXd forward_rows(const Eigen::MatrixXd& input) const;

  int input_width() const;
  int output_width() const;
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& layers() { return layers_; }
  std::uint64_t seed() const { return seed_; }
  bool empty() const { return layers_.empty(); }

 private:
  std::vector<DenseLayer> layers_;
  std::uint64_t seed_ = 0;
};

// Uniform [-1/sqrt(fan_in), 1/sqrt(fan_in)] matrix from a counter-based stream.
Eigen::MatrixXd seeded_uniform(int rows, int cols, int fan_in, std::uint64_t seed,
                               std::uint64_t stream);

// 2D convolution over an X x Y x C_in raster with zero padding.
// taps are indexed (kx * kernel + ky), each C_out x C_in; kernel is 1 or 3.
struct Conv2d {
  int kernel = 3;
  int in_channels = 0;
  int out_channels = 0;
  std::vector<Eigen::MatrixXd> taps;
  Eigen::VectorXd bias;

  static Conv2d seeded(int in_channels, int out_channels, int kernel, std::uint64_t seed);
  static Conv2d zeros(int in_channels, int out_channels, int kernel);
  Eigen::MatrixXd& center_tap() { return taps[static_cast<std::size_t>(taps.size() / 2)]; }

  // in: nx * ny * in_channels (row-major X, Y, C). Returns nx * ny * out_channels.
  std::vector<double> apply(std::span<const double> in, int nx, int ny) const;
};

double sigmoid(double x);

// Per-pixel expectation over bin centers: D = sum_d P_d * bin_d.
Tensor depth_expectation(const Tensor& depth_prob, std::span<const double> depth_bins);

// Mean |pred - gt| over pixels with gt > 0. Throws NoValidPixels when none.
double depth_l1_loss(const Tensor& pred_depth, const Tensor& gt_depth);

// Mean binary cross-entropy of logits against a {0,1} mask.
double bce_with_logits(std::span<const double> logits, std::span<const double> targets);

// L_depth + L_seg.
double pretrain_loss(const Tensor& pred_depth, const Tensor& gt_depth, const Tensor& pred_seg_logits,
                     const Tensor& gt_seg_mask);

struct LossWeights {
  double lambda_aux = 0.1;
};

// det + lambda * (depth_render + seg_render).
double total_loss(double det_loss, double depth_render_loss, double seg_render_loss,
                  const LossWeights& weights = {});

using ScalarFunction = std::function<double(std::span<const double>)>;

// Central differences with step h; returns max_i |g_fd - g_an| / max(1, |g_fd|).
// Throws NonFiniteFunction when f is not finite at a probe point.
double grad_check(const ScalarFunction& f, std::span<const double> x,
                  std::span<const double> analytic_grad, double h = 1e-4);

}  // namespace rags
