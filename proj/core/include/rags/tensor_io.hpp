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
#include <span>
#include <string>
#include <vector>

#include "rags/tensor.hpp"

namespace rags {

// "RAGS" container:
//   magic "RAGS" (4 bytes) | version u16 | rank u16 | dims u32 x rank |
//   payload float32, little-endian, row-major.
// Values are stored as float32; doubles round to nearest on save.
inline constexpr std::uint16_t kTensorFormatVersion = 1;
inline constexpr std::size_t kMaxTensorRank = 4;

std::vector<std::uint8_t> encode_tensor(const Tensor& tensor);

// Throws BadMagic, VersionMismatch, TruncatedFile or FormatError (trailing bytes).
Tensor decode_tensor(std::span<const std::uint8_t> bytes);

void save_tensor(const std::filesystem::path& path, const Tensor& tensor);
Tensor load_tensor(const std::filesystem::path& path);

// Rounds every element through float32, matching what a save/load cycle yields.
Tensor round_to_float32(const Tensor& tensor);

// CSV export of a 2-D slice: rank 1 and 2 as-is, rank 3 at `channel` of the last axis.
void save_csv(const std::filesystem::path& path, const Tensor& tensor, std::size_t channel = 0);

std::string base64_encode(std::span<const std::uint8_t> bytes);
// Throws FormatError on malformed input.
std::vector<std::uint8_t> base64_decode(const std::string& text);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace rags
