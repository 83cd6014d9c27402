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

#pragma once

// Multi-channel labelled voxel grids and the MRV1 on-disk format.
//
// MRV1: "MRV1", then little-endian u32 x, y, z, n_chan, labels_flag, then
// n_chan float32 grids in x-fastest order, then (labels_flag = 1) one u16
// label grid in the same order. Labels are 1-based on disk; 0 on disk means
// "unlabelled" and is rejected when a labelled volume is required.

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hqrf/types.hpp"

namespace hqrf {

struct Dims {
  int x = 0, y = 0, z = 0;

  std::int64_t count() const { return std::int64_t{x} * y * z; }
  std::int64_t index(int i, int j, int k) const { return i + std::int64_t{x} * (j + std::int64_t{y} * k); }
  int axis(int a) const { return a == 0 ? x : (a == 1 ? y : z); }
  bool operator==(const Dims&) const = default;
};

struct LabeledVolume {
  Dims dims;
  std::vector<std::vector<float>> channels;  // n_chan grids of dims.count()
  std::vector<ClassIndex> labels;             // zero-based; empty when unlabelled

  int n_channels() const { return static_cast<int>(channels.size()); }
  bool has_labels() const { return !labels.empty(); }
  float value(int c, int i, int j, int k) const { return channels[static_cast<std::size_t>(c)][static_cast<std::size_t>(dims.index(i, j, k))]; }
  ClassIndex label(int i, int j, int k) const { return labels[static_cast<std::size_t>(dims.index(i, j, k))]; }

  /// Throws DimensionMismatch when grids disagree with dims.
  void validate() const;
};

std::vector<std::uint8_t> encode_mrv(const LabeledVolume& volume);
LabeledVolume decode_mrv(const std::vector<std::uint8_t>& bytes);

LabeledVolume read_mrv(const std::filesystem::path& path);
void write_mrv(const std::filesystem::path& path, const LabeledVolume& volume);

/// Writes `bytes` to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& bytes);
std::string read_file(const std::filesystem::path& path);

}  // namespace hqrf
