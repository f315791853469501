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

#include "rags/nn.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rags/errors.hpp"
#include "rags/rng.hpp"

namespace rags {

namespace {

void apply_activation(Eigen::Ref<Eigen::MatrixXd> x, Activation a) {
  switch (a) {
    case Activation::kNone:
      break;
    case Activation::kRelu:
      x = x.cwiseMax(0.0);
      break;
    case Activation::kSigmoid:
      x = x.unaryExpr([](double v) { return sigmoid(v); });
      break;
  }
}

}  // namespace

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Eigen::MatrixXd seeded_uniform(int rows, int cols, int fan_in, std::uint64_t seed,
                               std::uint64_t stream) {
  CounterRng rng(seed, stream);
  const double bound = 1.0 / std::sqrt(static_cast<double>(std::max(fan_in, 1)));
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = rng.uniform(-bound, bound);
  }
  return m;
}

DenseStack::DenseStack(std::vector<DenseLayer> layers, std::uint64_t seed)
    : layers_(std::move(layers)), seed_(seed) {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    if (l.bias.size() != l.weight.rows()) {
      throw DimensionMismatch("layer " + std::to_string(i) + " bias does not match weight rows");
    }
    if (i > 0 && l.weight.cols() != layers_[i - 1].weight.rows()) {
      throw DimensionMismatch("layer " + std::to_string(i) + " input does not chain");
    }
    if (!l.weight.allFinite() || !l.bias.allFinite()) throw InvalidArgument("non-finite weights");
  }
}

DenseStack DenseStack::seeded(std::span<const int> widths, std::span<const Activation> activations,
                              std::uint64_t seed) {
  if (widths.size() < 2 || activations.size() != widths.size() - 1) {
    throw DimensionMismatch("dense stack needs one activation per layer");
  }
  std::vector<DenseLayer> layers;
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    const int in = widths[i];
    const int out = widths[i + 1];
    DenseLayer l;
    l.weight = seeded_uniform(out, in, in, seed, 2 * i);
    l.bias = seeded_uniform(out, 1, in, seed, 2 * i + 1).col(0);
    l.activation = activations[i];
    layers.push_back(std::move(l));
  }
  return DenseStack(std::move(layers), seed);
}

DenseStack DenseStack::zeros(std::span<const int> widths, std::span<const Activation> activations) {
  if (widths.size() < 2 || activations.size() != widths.size() - 1) {
    throw DimensionMismatch("dense stack needs one activation per layer");
  }
  std::vector<DenseLayer> layers;
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    layers.push_back({Eigen::MatrixXd::Zero(widths[i + 1], widths[i]),
                      Eigen::VectorXd::Zero(widths[i + 1]), activations[i]});
  }
  return DenseStack(std::move(layers));
}

int DenseStack::input_width() const {
  return layers_.empty() ? 0 : static_cast<int>(layers_.front().weight.cols());
}

int DenseStack::output_width() const {
  return layers_.empty() ? 0 : static_cast<int>(layers_.back().weight.rows());
}

Eigen::VectorXd DenseStack::forward(const Eigen::VectorXd& input) const {
  if (input.size() != input_width()) {
    throw DimensionMismatch("dense input width " + std::to_string(input.size()) + " != " +
                            std::to_string(input_width()));
  }
  Eigen::MatrixXd x = input;
  for (const auto& l : layers_) {
    x = l.weight * x + l.bias;
    apply_activation(x, l.activation);
  }
  return x.col(0);
}

Eigen::MatrixXd DenseStack::forward_rows(const Eigen::MatrixXd& input) const {
  if (input.cols() != input_width()) {
    throw DimensionMismatch("dense input width " + std::to_string(input.cols()) + " != " +
                            std::to_string(input_width()));
  }
  Eigen::MatrixXd x = input.transpose();
  for (const auto& l : layers_) {
    x = (l.weight * x).colwise() + l.bias;
    apply_activation(x, l.activation);
  }
  return x.transpose();
}

Conv2d Conv2d::seeded(int in_channels, int out_channels, int kernel, std::uint64_t seed) {
  Conv2d conv = zeros(in_channels, out_channels, kernel);
  const int fan_in = in_channels * kernel * kernel;
  for (std::size_t t = 0; t < conv.taps.size(); ++t) {
    conv.taps[t] = seeded_uniform(out_channels, in_channels, fan_in, seed, t);
  }
  conv.bias = seeded_uniform(out_channels, 1, fan_in, seed, conv.taps.size()).col(0);
  return conv;
}

Conv2d Conv2d::zeros(int in_channels, int out_channels, int kernel) {
  if (kernel != 1 && kernel != 3) throw InvalidArgument("conv kernel must be 1 or 3");
  if (in_channels <= 0 || out_channels <= 0) throw InvalidArgument("conv channels must be positive");
  Conv2d conv;
  conv.kernel = kernel;
  conv.in_channels = in_channels;
  conv.out_channels = out_channels;
  conv.taps.assign(static_cast<std::size_t>(kernel * kernel),
                   Eigen::MatrixXd::Zero(out_channels, in_channels));
  conv.bias = Eigen::VectorXd::Zero(out_channels);
  return conv;
}

std::vector<double> Conv2d::apply(std::span<const double> in, int nx, int ny) const {
  const std::size_t cells = static_cast<std::size_t>(nx) * ny;
  if (in.size() != cells * in_channels) {
    throw DimensionMismatch("conv input has " + std::to_string(in.size()) + " values, expected " +
                            std::to_string(cells * in_channels));
  }
  std::vector<double> out(cells * out_channels);
  const int half = kernel / 2;
  Eigen::VectorXd acc(out_channels);
  for (int ix = 0; ix < nx; ++ix) {
    for (int iy = 0; iy < ny; ++iy) {
      acc = bias;
      for (int kx = 0; kx < kernel; ++kx) {
        const int sx = ix + kx - half;
        if (sx < 0 || sx >= nx) continue;
        for (int ky = 0; ky < kernel; ++ky) {
          const int sy = iy + ky - half;
          if (sy < 0 || sy >= ny) continue;
          const Eigen::Map<const Eigen::VectorXd> src(
              in.data() + (static_cast<std::size_t>(sx) * ny + sy) * in_channels, in_channels);
          acc.noalias() += taps[static_cast<std::size_t>(kx * kernel + ky)] * src;
        }
      }
      std::copy(acc.data(), acc.data() + out_channels,
                out.begin() + static_cast<std::ptrdiff_t>((static_cast<std::size_t>(ix) * ny + iy) * out_channels));
    }
  }
  return out;
}

Tensor depth_expectation(const Tensor& depth_prob, std::span<const double> depth_bins) {
  if (depth_prob.rank() != 3) throw DimensionMismatch("depth_prob must be H x W x D");
  const std::size_t h = depth_prob.dim(0);
  const std::size_t w = depth_prob.dim(1);
  const std::size_t d = depth_prob.dim(2);
  if (d != depth_bins.size()) {
    throw DimensionMismatch("depth_prob has " + std::to_string(d) + " bins, ladder has " +
                            std::to_string(depth_bins.size()));
  }
  Tensor out({h, w});
  for (std::size_t px = 0; px < h * w; ++px) {
    const double* p = depth_prob.data().data() + px * d;
    double sum = 0.0;
    double expect = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      if (!(p[k] >= 0.0)) throw UnnormalizedDistribution("negative depth probability");
      sum += p[k];
      expect += p[k] * depth_bins[k];
    }
    if (std::abs(sum - 1.0) > 1e-5) {
      throw UnnormalizedDistribution("depth distribution at pixel " + std::to_string(px) +
                                     " sums to " + std::to_string(sum));
    }
    out[px] = expect;
  }
  return out;
}

double depth_l1_loss(const Tensor& pred_depth, const Tensor& gt_depth) {
  if (pred_depth.shape() != gt_depth.shape()) throw DimensionMismatch("depth shapes differ");
  double sum = 0.0;
  std::size_t valid = 0;
  for (std::size_t i = 0; i < gt_depth.size(); ++i) {
    if (gt_depth[i] > 0.0) {
      sum += std::abs(pred_depth[i] - gt_depth[i]);
      ++valid;
    }
  }
  if (valid == 0) throw NoValidPixels("ground-truth depth has no valid pixels");
  return sum / static_cast<double>(valid);
}

double bce_with_logits(std::span<const double> logits, std::span<const double> targets) {
  if (logits.size() != targets.size()) throw DimensionMismatch("logit/target sizes differ");
  if (logits.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double x = logits[i];
    sum += std::max(x, 0.0) - x * targets[i] + std::log1p(std::exp(-std::abs(x)));
  }
  return sum / static_cast<double>(logits.size());
}

double pretrain_loss(const Tensor& pred_depth, const Tensor& gt_depth, const Tensor& pred_seg_logits,
                     const Tensor& gt_seg_mask) {
  if (pred_seg_logits.shape() != gt_seg_mask.shape()) throw DimensionMismatch("seg shapes differ");
  if (pred_depth.shape() != pred_seg_logits.shape()) {
    throw DimensionMismatch("depth and segmentation shapes differ");
  }
  return depth_l1_loss(pred_depth, gt_depth) +
         bce_with_logits(pred_seg_logits.data(), gt_seg_mask.data());
}

double total_loss(double det_loss, double depth_render_loss, double seg_render_loss,
                  const LossWeights& weights) {
  if (!(weights.lambda_aux >= 0.0)) throw InvalidArgument("lambda_aux must be >= 0");
  return det_loss + weights.lambda_aux * (depth_render_loss + seg_render_loss);
}

double grad_check(const ScalarFunction& f, std::span<const double> x,
                  std::span<const double> analytic_grad, double h) {
  if (x.size() != analytic_grad.size()) throw DimensionMismatch("gradient size differs from x");
  std::vector<double> probe(x.begin(), x.end());
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double fp = f(probe);
    probe[i] = x[i] - h;
    const double fm = f(probe);
    probe[i] = x[i];
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw NonFiniteFunction("function is not finite near coordinate " + std::to_string(i));
    }
    const double fd = (fp - fm) / (2.0 * h);
    worst = std::max(worst, std::abs(fd - analytic_grad[i]) / std::max(1.0, std::abs(fd)));
  }
  return worst;
}

}  // namespace rags
