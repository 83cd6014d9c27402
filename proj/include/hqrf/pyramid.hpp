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

// Multiresolution cubic patch pyramid over a voxel grid.
//
// Layer r >= 1 holds cubes of side 3 * 2^(r-1) placed on a lattice with
// stride side * 2^(1-r) (= 3 voxels at every layer), keeping only cubes that
// fit entirely inside the volume. Layer 0 is the voxel grid itself. Patch ids
// are lattice indices in x-fastest order.
//
// Because the stride is 3 at every layer, the eight octants of any r >= 2
// patch are themselves members of layer r - 1; those are its children. The
// parent of a patch is chosen per axis: the smallest lattice position whose
// octant decomposition contains it, or, when none fits inside the volume, the
// containing position with the nearest centre.

#include <array>
#include <cstdint>
#include <vector>

#include "hqrf/types.hpp"
#include "hqrf/volume.hpp"

namespace hqrf {

using PatchId = std::int64_t;
using Int3 = std::array<int, 3>;

int patch_side(int layer);
int patch_stride(int layer);
/// Fraction of a patch side shared with its lattice neighbour: 1 - 2^(1-r).
double overlap_fraction(int layer);

struct LayerGeometry {
  int layer = 0;
  int side = 1;
  int stride = 1;
  Int3 counts{0, 0, 0};

  std::int64_t size() const { return std::int64_t{counts[0]} * counts[1] * counts[2]; }
  Int3 lattice(PatchId id) const;
  PatchId id_of(const Int3& lat) const { return lat[0] + std::int64_t{counts[0]} * (lat[1] + std::int64_t{counts[1]} * lat[2]); }
  Int3 origin(PatchId id) const;
  bool contains(const Int3& lat) const;
};

/// Throws VolumeTooSmall when not a single patch of the layer fits.
LayerGeometry layer_geometry(const Dims& dims, int layer);

struct CellRegion {
  Int3 origin;
  int side = 1;
};

/// 27 equal sub-cubes of a patch in x-fastest order; NoCells for layer 0.
std::array<CellRegion, 27> patch_cells(int layer, const Int3& origin);

/// Per-class summed-volume tables for O(n_classes) box histograms.
class LabelTables {
 public:
  LabelTables(const LabeledVolume& volume, int n_classes);
  std::vector<std::int64_t> histogram(const Int3& origin, int side) const;
  int n_classes() const { return n_classes_; }

 private:
  std::int64_t at(int c, int i, int j, int k) const;
  Dims dims_;
  int n_classes_;
  std::vector<std::vector<std::int32_t>> tables_;
};

struct LabelStats {
  std::vector<std::int64_t> histogram;
  ClassIndex ref_label = 0;
  double heterogeneity = 0.0;
};

/// Mode (ties to the smallest class) and heterogeneity = #{c : 2 n_c >= max n} - 1.
LabelStats label_stats_from_histogram(std::vector<std::int64_t> histogram);

struct Patch {
  int layer = 0;
  PatchId id = 0;
  Int3 origin{0, 0, 0};
  int side = 1;
  PatchId parent = -1;
  std::vector<PatchId> children;
  std::vector<PatchId> neighbors;
  LabelStats labels;
};

class Pyramid {
 public:
  Pyramid(const Dims& dims, int n_layers);

  const Dims& dims() const { return dims_; }
  int n_layers() const { return n_layers_; }
  const LayerGeometry& layer(int r) const { return layers_.at(static_cast<std::size_t>(r)); }

  /// Octant children at layer r - 1 for r >= 2; 27 voxel ids for r = 1; empty for r = 0.
  std::vector<PatchId> children(int r, PatchId id) const;
  /// Patch at layer r + 1 that owns this one; -1 at the top layer.
  PatchId parent(int r, PatchId id) const;
  /// Lattice neighbours at offsets {-1,0,1}^3 \ {0}, ascending id.
  std::vector<PatchId> neighbors(int r, PatchId id) const;
  /// Layer-1 patch covering a voxel, clamped into the lattice for voxels past the last patch.
  PatchId layer1_patch_of_voxel(int i, int j, int k) const;

  Patch patch(int r, PatchId id, const LabelTables* tables = nullptr) const;

 private:
  Dims dims_;
  int n_layers_;
  std::vector<LayerGeometry> layers_;
};

struct VoxelRecord {
  Int3 position;
  PatchId voxel_id = 0;
  std::vector<float> intensities;
  ClassIndex label = -1;  // -1 when the volume is unlabelled
};

/// The 27 voxels of a layer-1 patch.
std::vector<VoxelRecord> decompose_to_voxels(const Pyramid& pyramid, PatchId id, const LabeledVolume& volume);

}  // namespace hqrf
