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

// Synthetic labelled volumes and point sets.
//
// blocks:      4 classes, 2 channels. Class 1 fills the background; each
//              foreground class owns axis-aligned boxes. Per-class channel
//              means are fixed, plus Gaussian noise.
// concentric:  nested spheres around the volume centre, 3 channels holding the
//              centred voxel coordinates plus noise, so classes differ only in
//              radial extent.

#include <cstdint>
#include <vector>

#include "hqrf/types.hpp"
#include "hqrf/volume.hpp"

namespace hqrf {

inline constexpr int kBlocksClasses = 4;

struct BlocksConfig {
  Dims dims{48, 48, 48};
  double noise = 10.0;
  int boxes_per_class = 2;
  int min_side = 12;
  int max_side = 22;
};

/// Channel means of each class (row = class) for the blocks preset.
const std::vector<std::vector<double>>& blocks_class_means();

LabeledVolume synth_blocks(const BlocksConfig& config, std::uint64_t seed);

struct ConcentricConfig {
  Dims dims{48, 48, 48};
  double noise = 0.0;
  std::vector<double> radii{16.0, 8.0};  // descending; n_classes = radii.size() + 1
};

/// Label = number of radii strictly greater than the distance of the voxel
/// centre from the volume centre (0 = outermost class).
ClassIndex concentric_label(const ConcentricConfig& config, int i, int j, int k);
LabeledVolume synth_concentric(const ConcentricConfig& config, std::uint64_t seed);

struct PointSet {
  MatrixXd x;
  std::vector<ClassIndex> y;
};

/// Two classes in the plane: class 0 uniform in the unit disk, class 1 uniform
/// in the annulus 1.3 <= r <= 2. Alternating labels.
PointSet concentric_samples(int n, std::uint64_t seed);

}  // namespace hqrf
