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

#include "hqrf/pyramid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

#include "hqrf/error.hpp"

namespace hqrf {

int patch_side(int layer) { return layer <= 0 ? 1 : 3 << (layer - 1); }

int patch_stride(int layer) {
  if (layer <= 0) return 1;
  // side * 2^(1-r) with side = 3 * 2^(r-1)
  return patch_side(layer) >> (layer - 1);
}

double overlap_fraction(int layer) { return layer <= 0 ? 0.0 : 1.0 - std::ldexp(1.0, 1 - layer); }

Int3 LayerGeometry::lattice(PatchId id) const {
  const auto nx = std::int64_t{counts[0]}, ny = std::int64_t{counts[1]};
  return {static_cast<int>(id % nx), static_cast<int>((id / nx) % ny), static_cast<int>(id / (nx * ny))};
}

Int3 LayerGeometry::origin(PatchId id) const {
  const Int3 l = lattice(id);
  return {l[0] * stride, l[1] * stride, l[2] * stride};
}

bool LayerGeometry::contains(const Int3& lat) const {
  for (int a = 0; a < 3; ++a)
    if (lat[static_cast<std::size_t>(a)] < 0 || lat[static_cast<std::size_t>(a)] >= counts[static_cast<std::size_t>(a)]) return false;
  return true;
}

LayerGeometry layer_geometry(const Dims& dims, int layer) {
  if (layer < 0) throw Error(ErrorKind::kBadConfig, "negative layer");
  LayerGeometry g;
  g.layer = layer;
  g.side = patch_side(layer);
  g.stride = patch_stride(layer);
  for (int a = 0; a < 3; ++a) {
    const int d = dims.axis(a);
    if (d < g.side)
      throw Error(ErrorKind::kVolumeTooSmall, "layer " + std::to_string(layer) + " needs " + std::to_string(g.side) +
                                                  " voxels per axis");
    g.counts[static_cast<std::size_t>(a)] = (d - g.side) / g.stride + 1;
  }
  return g;
}

std::array<CellRegion, 27> patch_cells(int layer, const Int3& origin) {
  if (layer < 1) throw Error(ErrorKind::kNoCells, "voxels have no cells");
  const int c = patch_side(layer) / 3;
  std::array<CellRegion, 27> cells{};
  int n = 0;
  for (int k = 0; k < 3; ++k)
    for (int j = 0; j < 3; ++j)
      for (int i = 0; i < 3; ++i) cells[static_cast<std::size_t>(n++)] = {{origin[0] + i * c, origin[1] + j * c, origin[2] + k * c}, c};
  return cells;
}

// ---------------------------------------------------------------------------

LabelTables::LabelTables(const LabeledVolume& volume, int n_classes) : dims_(volume.dims), n_classes_(n_classes) {
  if (!volume.has_labels()) throw Error(ErrorKind::kDimensionMismatch, "volume carries no labels");
  const std::int64_t sx = dims_.x + 1, sy = dims_.y + 1, sz = dims_.z + 1;
  tables_.assign(static_cast<std::size_t>(n_classes), std::vector<std::int32_t>(static_cast<std::size_t>(sx * sy * sz), 0));
  auto idx = [&](int i, int j, int k) { return static_cast<std::size_t>(i + sx * (j + sy * k)); };
  for (int k = 0; k < dims_.z; ++k)
    for (int j = 0; j < dims_.y; ++j)
      for (int i = 0; i < dims_.x; ++i) {
        const ClassIndex l = volume.label(i, j, k);
        if (l < 0 || l >= n_classes) throw Error(ErrorKind::kDimensionMismatch, "voxel label outside class universe");
        for (int c = 0; c < n_classes; ++c) {
          auto& t = tables_[static_cast<std::size_t>(c)];
          t[idx(i + 1, j + 1, k + 1)] = (l == c ? 1 : 0) + t[idx(i, j + 1, k + 1)] + t[idx(i + 1, j, k + 1)] +
                                        t[idx(i + 1, j + 1, k)] - t[idx(i, j, k + 1)] - t[idx(i, j + 1, k)] -
                                        t[idx(i + 1, j, k)] + t[idx(i, j, k)];
        }
      }
}

std::int64_t LabelTables::at(int c, int i, int j, int k) const {
  const std::int64_t sx = dims_.x + 1, sy = dims_.y + 1;
  return tables_[static_cast<std::size_t>(c)][static_cast<std::size_t>(i + sx * (j + sy * k))];
}

std::vector<std::int64_t> LabelTables::histogram(const Int3& o, int side) const {
  const int x0 = o[0], y0 = o[1], z0 = o[2], x1 = x0 + side, y1 = y0 + side, z1 = z0 + side;
  if (x0 < 0 || y0 < 0 || z0 < 0 || x1 > dims_.x || y1 > dims_.y || z1 > dims_.z)
    throw Error(ErrorKind::kDimensionMismatch, "box outside the volume");
  std::vector<std::int64_t> h(static_cast<std::size_t>(n_classes_));
  for (int c = 0; c < n_classes_; ++c)
    h[static_cast<std::size_t>(c)] = at(c, x1, y1, z1) - at(c, x0, y1, z1) - at(c, x1, y0, z1) - at(c, x1, y1, z0) +
                                     at(c, x0, y0, z1) + at(c, x0, y1, z0) + at(c, x1, y0, z0) - at(c, x0, y0, z0);
  return h;
}

LabelStats label_stats_from_histogram(std::vector<std::int64_t> histogram) {
  LabelStats s;
  s.histogram = std::move(histogram);
  std::int64_t max = 0;
  for (std::size_t c = 0; c < s.histogram.size(); ++c)
    if (s.histogram[c] > max) {
      max = s.histogram[c];
      s.ref_label = static_cast<ClassIndex>(c);
    }
  if (max == 0) return s;
  int wide = 0;
  for (auto n : s.histogram)
    if (2 * n >= max) ++wide;
  s.heterogeneity = static_cast<double>(wide - 1);
  return s;
}

// ---------------------------------------------------------------------------

Pyramid::Pyramid(const Dims& dims, int n_layers) : dims_(dims), n_layers_(n_layers) {
  if (n_layers < 1 || n_layers > 12) throw Error(ErrorKind::kBadConfig, "n_layers must lie in 1..12");
  if (dims.x < 1 || dims.y < 1 || dims.z < 1) throw Error(ErrorKind::kDimensionMismatch, "volume dims must be positive");
  for (int r = 0; r <= n_layers; ++r) layers_.push_back(layer_geometry(dims, r));
}

std::vector<PatchId> Pyramid::children(int r, PatchId id) const {
  std::vector<PatchId> out;
  if (r <= 0) return out;
  const auto& g = layer(r);
  const Int3 o = g.origin(id);
  if (r == 1) {
    out.reserve(27);
    for (int k = 0; k < 3; ++k)
      for (int j = 0; j < 3; ++j)
        for (int i = 0; i < 3; ++i) out.push_back(dims_.index(o[0] + i, o[1] + j, o[2] + k));
    return out;
  }
  const auto& c = layer(r - 1);
  const int half = g.side / 2;
  out.reserve(8);
  for (int k = 0; k < 2; ++k)
    for (int j = 0; j < 2; ++j)
      for (int i = 0; i < 2; ++i) {
        const Int3 lat{(o[0] + i * half) / c.stride, (o[1] + j * half) / c.stride, (o[2] + k * half) / c.stride};
        out.push_back(c.id_of(lat));
      }
  return out;
}

PatchId Pyramid::parent(int r, PatchId id) const {
  if (r >= n_layers_) return -1;
  const auto& g = layer(r);
  const auto& p = layer(r + 1);
  const Int3 o = g.origin(id);
  const int s = g.side;
  Int3 lat{};
  for (int a = 0; a < 3; ++a) {
    const int max_lat = p.counts[static_cast<std::size_t>(a)] - 1;
    const int pos = o[static_cast<std::size_t>(a)];
    int chosen = -1;
    if (r == 0) {
      // voxels: any containing r = 1 cube; there is at most one since stride = side
      chosen = std::min(pos / p.stride, max_lat);
    } else {
      for (int cand : {pos - s, pos})
        if (cand >= 0 && cand % p.stride == 0 && cand / p.stride <= max_lat) {
          chosen = cand / p.stride;
          break;
        }
      if (chosen < 0) {
        // nearest centre among parents that still contain the patch
        const int lo = std::max(0, (pos + s - p.side + p.stride - 1) / p.stride);
        const int hi = std::min(max_lat, pos / p.stride);
        const int target2 = 2 * pos + s - p.side;  // twice the ideal parent origin
        int best = lo;
        for (int l = lo; l <= hi; ++l)
          if (std::abs(2 * l * p.stride - target2) < std::abs(2 * best * p.stride - target2)) best = l;
        chosen = best;
      }
    }
    lat[static_cast<std::size_t>(a)] = chosen;
  }
  return p.id_of(lat);
}

std::vector<PatchId> Pyramid::neighbors(int r, PatchId id) const {
  const auto& g = layer(r);
  const Int3 l = g.lattice(id);
  std::vector<PatchId> out;
  out.reserve(26);
  for (int dk = -1; dk <= 1; ++dk)
    for (int dj = -1; dj <= 1; ++dj)
      for (int di = -1; di <= 1; ++di) {
        if (di == 0 && dj == 0 && dk == 0) continue;
        const Int3 n{l[0] + di, l[1] + dj, l[2] + dk};
        if (g.contains(n)) out.push_back(g.id_of(n));
      }
  return out;
}

PatchId Pyramid::layer1_patch_of_voxel(int i, int j, int k) const {
  const auto& g = layer(1);
  const Int3 lat{std::min(i / 3, g.counts[0] - 1), std::min(j / 3, g.counts[1] - 1), std::min(k / 3, g.counts[2] - 1)};
  return g.id_of(lat);
}

Patch Pyramid::patch(int r, PatchId id, const LabelTables* tables) const {
  const auto& g = layer(r);
  if (id < 0 || id >= g.size()) throw Error(ErrorKind::kDimensionMismatch, "patch id out of range");
  Patch p;
  p.layer = r;
  p.id = id;
  p.origin = g.origin(id);
  p.side = g.side;
  p.parent = parent(r, id);
  p.children = children(r, id);
  p.neighbors = neighbors(r, id);
  if (tables) p.labels = label_stats_from_histogram(tables->histogram(p.origin, p.side));
  return p;
}

std::vector<VoxelRecord> decompose_to_voxels(const Pyramid& pyramid, PatchId id, const LabeledVolume& volume) {
  if (!(volume.dims == pyramid.dims())) throw Error(ErrorKind::kDimensionMismatch, "volume does not match pyramid");
  const Int3 o = pyramid.layer(1).origin(id);
  std::vector<VoxelRecord> out;
  out.reserve(27);
  for (int k = 0; k < 3; ++k)
    for (int j = 0; j < 3; ++j)
      for (int i = 0; i < 3; ++i) {
        VoxelRecord v;
        v.position = {o[0] + i, o[1] + j, o[2] + k};
        v.voxel_id = volume.dims.index(v.position[0], v.position[1], v.position[2]);
        for (int c = 0; c < volume.n_channels(); ++c) v.intensities.push_back(volume.value(c, v.position[0], v.position[1], v.position[2]));
        if (volume.has_labels()) v.label = volume.label(v.position[0], v.position[1], v.position[2]);
        out.push_back(std::move(v));
      }
  return out;
}

}  // namespace hqrf
