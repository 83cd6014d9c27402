// Copyright 2026 The HQRF Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hqrf/volume.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

#include "hqrf/error.hpp"

namespace hqrf {

namespace {

constexpr char kMagic[4] = {'M', 'R', 'V', '1'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw Error(ErrorKind::kFormat, "MRV1 stream truncated");
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int b = 0; b < 4; ++b) v |= std::uint32_t{bytes_[pos_ + static_cast<std::size_t>(b)]} << (8 * b);
    pos_ += 4;
    return v;
  }
  std::uint16_t u16() {
    need(2);
    const auto v = static_cast<std::uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  bool done() const { return pos_ == bytes_.size(); }
  std::size_t pos() const { return pos_; }
  void skip(std::size_t n) {
    need(n);
    pos_ += n;
  }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

void LabeledVolume::validate() const {
  if (dims.x < 1 || dims.y < 1 || dims.z < 1) throw Error(ErrorKind::kDimensionMismatch, "volume dims must be positive");
  if (channels.empty()) throw Error(ErrorKind::kDimensionMismatch, "volume needs at least one channel");
  const auto n = static_cast<std::size_t>(dims.count());
  for (const auto& c : channels)
    if (c.size() != n) throw Error(ErrorKind::kDimensionMismatch, "channel grid size differs from dims");
  if (!labels.empty() && labels.size() != n)
    throw Error(ErrorKind::kDimensionMismatch, "label grid size differs from dims");
}

std::vector<std::uint8_t> encode_mrv(const LabeledVolume& volume) {
  volume.validate();
  std::vector<std::uint8_t> out;
  const auto n = static_cast<std::size_t>(volume.dims.count());
  out.reserve(24 + n * (4 * volume.channels.size() + (volume.has_labels() ? 2 : 0)));
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put_u32(out, static_cast<std::uint32_t>(volume.dims.x));
  put_u32(out, static_cast<std::uint32_t>(volume.dims.y));
  put_u32(out, static_cast<std::uint32_t>(volume.dims.z));
  put_u32(out, static_cast<std::uint32_t>(volume.channels.size()));
  put_u32(out, volume.has_labels() ? 1u : 0u);
  for (const auto& c : volume.channels)
    for (float v : c) put_u32(out, std::bit_cast<std::uint32_t>(v));
  for (ClassIndex l : volume.labels) {
    if (l < 0 || l + 1 > std::numeric_limits<std::uint16_t>::max())
      throw Error(ErrorKind::kFormat, "label outside the u16 range");
    put_u16(out, static_cast<std::uint16_t>(l + 1));
  }
  return out;
}

LabeledVolume decode_mrv(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  r.need(4);
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw Error(ErrorKind::kFormat, "missing MRV1 magic");
  r.skip(4);
  LabeledVolume v;
  const std::uint32_t x = r.u32(), y = r.u32(), z = r.u32(), n_chan = r.u32(), flag = r.u32();
  constexpr std::uint32_t kMaxAxis = 1u << 14;
  if (x == 0 || y == 0 || z == 0 || x > kMaxAxis || y > kMaxAxis || z > kMaxAxis)
    throw Error(ErrorKind::kFormat, "MRV1 dims out of range");
  if (n_chan == 0 || n_chan > 256) throw Error(ErrorKind::kFormat, "MRV1 channel count out of range");
  if (flag > 1) throw Error(ErrorKind::kFormat, "MRV1 labels_flag must be 0 or 1");
  v.dims = {static_cast<int>(x), static_cast<int>(y), static_cast<int>(z)};
  const auto n = static_cast<std::size_t>(v.dims.count());
  r.need(n * 4 * n_chan + (flag ? n * 2 : 0));
  v.channels.assign(n_chan, std::vector<float>(n));
  for (auto& c : v.channels)
    for (auto& value : c) value = r.f32();
  if (flag) {
    v.labels.resize(n);
    for (auto& l : v.labels) {
      const std::uint16_t raw = r.u16();
      if (raw == 0) throw Error(ErrorKind::kFormat, "MRV1 label 0 is not a class id");
      l = static_cast<ClassIndex>(raw) - 1;
    }
  }
  if (!r.done()) throw Error(ErrorKind::kFormat, "trailing bytes after MRV1 payload");
  return v;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorKind::kIo, "read failed for " + path.string());
  return ss.str();
}

LabeledVolume read_mrv(const std::filesystem::path& path) {
  const std::string s = read_file(path);
  return decode_mrv(std::vector<std::uint8_t>(s.begin(), s.end()));
}

void write_file_atomic(const std::filesystem::path& path, const std::string& bytes) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::kIo, "cannot create " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw Error(ErrorKind::kIo, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorKind::kIo, "cannot rename into " + path.string());
  }
}

void write_mrv(const std::filesystem::path& path, const LabeledVolume& volume) {
  const auto bytes = encode_mrv(volume);
  write_file_atomic(path, std::string(bytes.begin(), bytes.end()));
}

}  // namespace hqrf
