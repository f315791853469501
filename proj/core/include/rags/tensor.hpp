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

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace rags {

// Dense row-major tensor of doubles. Rank 0 is not supported; rank is at
// least 1 for any non-default tensor.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0);
  Tensor(std::vector<std::size_t> shape, std::vector<double> data);

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  std::vector<double>& storage() { return data_; }
  const std::vector<double>& storage() const { return data_; }

  double& operator[](std::size_t flat) { return data_[flat]; }
  double operator[](std::size_t flat) const { return data_[flat]; }

  template <class... Index>
  double& operator()(Index... idx) {
    return data_[offset(std::array<std::size_t, sizeof...(Index)>{static_cast<std::size_t>(idx)...})];
  }
  template <class... Index>
  double operator()(Index... idx) const {
    return data_[offset(std::array<std::size_t, sizeof...(Index)>{static_cast<std::size_t>(idx)...})];
  }

  bool all_finite() const;
  std::string shape_string() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  template <std::size_t R>
  std::size_t offset(const std::array<std::size_t, R>& idx) const {
    std::size_t flat = 0;
    for (std::size_t i = 0; i < R; ++i) flat = flat * shape_[i] + idx[i];
    return flat;
  }

  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

}  // namespace rags
