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

#include "rags/tensor_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "rags/errors.hpp"

namespace rags {

namespace {

constexpr std::array<std::uint8_t, 4> kMagic = {'R', 'A', 'G', 'S'};
constexpr std::size_t kHeaderSize = 8;

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int s = 0; s < 32; s += 8) out.push_back(static_cast<std::uint8_t>((v >> s) & 0xFF));
}

std::uint16_t get_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

constexpr char kB64[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int b64_value(char c) {
  if (c >= 'A' && c <= 'Z') return c - 'A';
  if (c >= 'a' && c <= 'z') return c - 'a' + 26;
  if (c >= '0' && c <= '9') return c - '0' + 52;
  if (c == '+') return 62;
  if (c == '/') return 63;
  return -1;
}

}  // namespace

std::vector<std::uint8_t> encode_tensor(const Tensor& tensor) {
  if (tensor.rank() == 0 || tensor.rank() > kMaxTensorRank) {
    throw InvalidArgument("RAGS container supports rank 1..4, got " + std::to_string(tensor.rank()));
  }
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderSize + 4 * tensor.rank() + 4 * tensor.size());
  for (std::uint8_t b : kMagic) out.push_back(b);
  put_u16(out, kTensorFormatVersion);
  put_u16(out, static_cast<std::uint16_t>(tensor.rank()));
  for (std::size_t d : tensor.shape()) {
    if (d > std::numeric_limits<std::uint32_t>::max()) throw InvalidArgument("tensor dimension exceeds u32");
    put_u32(out, static_cast<std::uint32_t>(d));
  }
  for (double v : tensor.data()) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  return out;
}

Tensor decode_tensor(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) throw TruncatedFile("file shorter than the magic");
  if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) throw BadMagic("missing RAGS magic");
  if (bytes.size() < kHeaderSize) throw TruncatedFile("file shorter than the header");
  const std::uint16_t version = get_u16(bytes.data() + 4);
  if (version != kTensorFormatVersion) {
    throw VersionMismatch("unsupported RAGS version " + std::to_string(version));
  }
  const std::uint16_t rank = get_u16(bytes.data() + 6);
  if (rank == 0 || rank > kMaxTensorRank) throw FormatError("invalid rank " + std::to_string(rank));
  if (bytes.size() < kHeaderSize + 4u * rank) throw TruncatedFile("file ends inside the dims block");
  std::vector<std::size_t> shape(rank);
  std::size_t count = 1;
  for (std::size_t i = 0; i < rank; ++i) {
    shape[i] = get_u32(bytes.data() + kHeaderSize + 4 * i);
    count *= shape[i];
  }
  const std::size_t payload_at = kHeaderSize + 4u * rank;
  const std::size_t expected = payload_at + 4 * count;
  if (bytes.size() < expected) throw TruncatedFile("payload is shorter than the declared shape");
  if (bytes.size() > expected) throw FormatError("trailing bytes after payload");
  std::vector<double> data(count);
  for (std::size_t i = 0; i < count; ++i) {
    data[i] = std::bit_cast<float>(get_u32(bytes.data() + payload_at + 4 * i));
  }
  return Tensor(std::move(shape), std::move(data));
}

void save_tensor(const std::filesystem::path& path, const Tensor& tensor) {
  write_file(path, encode_tensor(tensor));
}

Tensor load_tensor(const std::filesystem::path& path) { return decode_tensor(read_file(path)); }

Tensor round_to_float32(const Tensor& tensor) {
  Tensor out = tensor;
  for (double& v : out.storage()) v = static_cast<float>(v);
  return out;
}

void save_csv(const std::filesystem::path& path, const Tensor& tensor, std::size_t channel) {
  std::ostringstream os;
  os << std::setprecision(9);
  if (tensor.rank() == 1) {
    for (std::size_t i = 0; i < tensor.size(); ++i) os << tensor[i] << '\n';
  } else if (tensor.rank() == 2 || tensor.rank() == 3) {
    const std::size_t rows = tensor.dim(0);
    const std::size_t cols = tensor.dim(1);
    const std::size_t depth = tensor.rank() == 3 ? tensor.dim(2) : 1;
    if (channel >= depth) throw InvalidArgument("CSV channel out of range");
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        if (c > 0) os << ',';
        os << tensor[(r * cols + c) * depth + channel];
      }
      os << '\n';
    }
  } else {
    throw InvalidArgument("CSV export supports rank 1..3");
  }
  const std::string text = os.str();
  write_file(path, std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out += kB64[(v >> 18) & 63];
    out += kB64[(v >> 12) & 63];
    out += kB64[(v >> 6) & 63];
    out += kB64[v & 63];
  }
  const std::size_t rest = bytes.size() - i;
  if (rest == 1) {
    const std::uint32_t v = bytes[i] << 16;
    out += kB64[(v >> 18) & 63];
    out += kB64[(v >> 12) & 63];
    out += "==";
  } else if (rest == 2) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8);
    out += kB64[(v >> 18) & 63];
    out += kB64[(v >> 12) & 63];
    out += kB64[(v >> 6) & 63];
    out += '=';
  }
  return out;
}

std::vector<std::uint8_t> base64_decode(const std::string& text) {
  if (text.size() % 4 != 0) throw FormatError("base64 length is not a multiple of 4");
  std::vector<std::uint8_t> out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    int v[4];
    int pad = 0;
    for (int k = 0; k < 4; ++k) {
      const char c = text[i + k];
      if (c == '=' && i + 4 == text.size() && k >= 2) {
        v[k] = 0;
        ++pad;
      } else {
        if (pad > 0) throw FormatError("base64 data after padding");
        v[k] = b64_value(c);
        if (v[k] < 0) throw FormatError("invalid base64 character");
      }
    }
    const std::uint32_t word = (v[0] << 18) | (v[1] << 12) | (v[2] << 6) | v[3];
    out.push_back(static_cast<std::uint8_t>((word >> 16) & 0xFF));
    if (pad < 2) out.push_back(static_cast<std::uint8_t>((word >> 8) & 0xFF));
    if (pad < 1) out.push_back(static_cast<std::uint8_t>(word & 0xFF));
  }
  return out;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed for " + path.string());
}

}  // namespace rags
