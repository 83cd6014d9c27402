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

#include "hqrf/synth.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "hqrf/error.hpp"

namespace hqrf {

const std::vector<std::vector<double>>& blocks_class_means() {
  static const std::vector<std::vector<double>> means{{20.0, 80.0}, {80.0, 20.0}, {70.0, 70.0}, {30.0, 30.0}};
  return means;
}

LabeledVolume synth_blocks(const BlocksConfig& cfg, std::uint64_t seed) {
  if (cfg.dims.x < 1 || cfg.dims.y < 1 || cfg.dims.z < 1 || cfg.noise < 0.0 || cfg.min_side < 1 ||
      cfg.max_side < cfg.min_side || cfg.boxes_per_class < 0)
    throw Error(ErrorKind::kBadConfig, "invalid blocks configuration");
  std::mt19937_64 rng(mix_seed(seed, 0xb10c));
  LabeledVolume v;
  v.dims = cfg.dims;
  const auto n = static_cast<std::size_t>(v.dims.count());
  v.labels.assign(n, 0);

  std::vector<std::array<int, 6>> placed;  // lo xyz, hi xyz (exclusive)
  auto overlaps = [&](const std::array<int, 6>& b) {
    for (const auto& p : placed) {
      bool apart = false;
      for (int a = 0; a < 3; ++a)
        if (b[static_cast<std::size_t>(a + 3)] + 1 <= p[static_cast<std::size_t>(a)] ||
            p[static_cast<std::size_t>(a + 3)] + 1 <= b[static_cast<std::size_t>(a)])
          apart = true;
      if (!apart) return true;
    }
    return false;
  };
  for (int round = 0; round < cfg.boxes_per_class; ++round)
    for (int c = 1; c < kBlocksClasses; ++c) {
      for (int attempt = 0; attempt < 500; ++attempt) {
        std::array<int, 6> b{};
        bool fits = true;
        for (int a = 0; a < 3; ++a) {
          const int side = std::uniform_int_distribution<int>(cfg.min_side, cfg.max_side)(rng);
          const int extent = cfg.dims.axis(a);
          if (side > extent) {
            fits = false;
            break;
          }
          const int lo = std::uniform_int_distribution<int>(0, extent - side)(rng);
          b[static_cast<std::size_t>(a)] = lo;
          b[static_cast<std::size_t>(a + 3)] = lo + side;  // exclusive
        }
        if (!fits || overlaps(b)) continue;
        placed.push_back(b);
        for (int k = b[2]; k < b[5]; ++k)
          for (int j = b[1]; j < b[4]; ++j)
            for (int i = b[0]; i < b[3]; ++i) v.labels[static_cast<std::size_t>(v.dims.index(i, j, k))] = c;
        break;
      }
    }

  const auto& means = blocks_class_means();
  std::normal_distribution<double> noise(0.0, 1.0);
  v.channels.assign(2, std::vector<float>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < 2; ++c)
      v.channels[c][i] = static_cast<float>(means[static_cast<std::size_t>(v.labels[i])][c] + cfg.noise * noise(rng));
  return v;
}

ClassIndex concentric_label(const ConcentricConfig& cfg, int i, int j, int k) {
  const double dx = i + 0.5 - cfg.dims.x / 2.0, dy = j + 0.5 - cfg.dims.y / 2.0, dz = k + 0.5 - cfg.dims.z / 2.0;
  const double d = std::sqrt(dx * dx + dy * dy + dz * dz);
  ClassIndex l = 0;
  for (double r : cfg.radii)
    if (d < r) ++l;
  return l;
}

LabeledVolume synth_concentric(const ConcentricConfig& cfg, std::uint64_t seed) {
  if (cfg.dims.x < 1 || cfg.dims.y < 1 || cfg.dims.z < 1 || cfg.noise < 0.0 || cfg.radii.empty())
    throw Error(ErrorKind::kBadConfig, "invalid concentric configuration");
  for (std::size_t i = 1; i < cfg.radii.size(); ++i)
    if (!(cfg.radii[i] < cfg.radii[i - 1])) throw Error(ErrorKind::kBadConfig, "radii must be strictly descending");
  std::mt19937_64 rng(mix_seed(seed, 0xc0c));
  std::normal_distribution<double> noise(0.0, 1.0);
  LabeledVolume v;
  v.dims = cfg.dims;
  const auto n = static_cast<std::size_t>(v.dims.count());
  v.labels.resize(n);
  v.channels.assign(3, std::vector<float>(n));
  for (int k = 0; k < v.dims.z; ++k)
    for (int j = 0; j < v.dims.y; ++j)
      for (int i = 0; i < v.dims.x; ++i) {
        const auto idx = static_cast<std::size_t>(v.dims.index(i, j, k));
        v.labels[idx] = concentric_label(cfg, i, j, k);
        const std::array<double, 3> centred{i + 0.5 - v.dims.x / 2.0, j + 0.5 - v.dims.y / 2.0, k + 0.5 - v.dims.z / 2.0};
        for (std::size_t c = 0; c < 3; ++c) {
          const double e = cfg.noise > 0.0 ? cfg.noise * noise(rng) : 0.0;
          v.channels[c][idx] = static_cast<float>(centred[c] + e);
        }
      }
  return v;
}

PointSet concentric_samples(int n, std::uint64_t seed) {
  if (n < 2) throw Error(ErrorKind::kBadConfig, "need at least two samples");
  std::mt19937_64 rng(mix_seed(seed, 0xd15c));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  PointSet s;
  s.x.resize(n, 2);
  s.y.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const ClassIndex c = i % 2;
    const double lo = c == 0 ? 0.0 : 1.3, hi = c == 0 ? 1.0 : 2.0;
    // area-uniform radius
    const double r = std::sqrt(lo * lo + unit(rng) * (hi * hi - lo * lo));
    const double a = 2.0 * std::numbers::pi * unit(rng);
    s.x(i, 0) = r * std::cos(a);
    s.x(i, 1) = r * std::sin(a);
    s.y[static_cast<std::size_t>(i)] = c;
  }
  return s;
}

}  // namespace hqrf
