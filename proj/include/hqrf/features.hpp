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

// Patch descriptors, quadratic feature expansion and per-tree feature subsets.
//
// Schema "hqrf-default-v1" for C channels, in index order:
//   per channel:       median, cell_mean, cell_var, cell_min, cell_max,
//                      contrast_x, contrast_y, contrast_z            (8 C)
//   per pair a < b:    ratio a/(a+b+1e-9), difference a-b            (2 C(C,2))
//   per channel:       nbr_mean, nbr_var, nbr_contrast               (3 C)
//   per ordered pair:  median_a - nbr_mean_b                         (C (C-1))
// "cell" statistics are over the 27 cell medians; contrast_axis is the median
// of the 9 cell medians in the far plane minus that of the near plane.
// Neighbour statistics use the medians of the existing lattice neighbours;
// a patch without neighbours uses its own median (variance and contrasts 0).

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "hqrf/normalizer.hpp"
#include "hqrf/pyramid.hpp"
#include "hqrf/types.hpp"
#include "hqrf/volume.hpp"

namespace hqrf {

inline constexpr const char* kDefaultSchemaId = "hqrf-default-v1";
inline constexpr double kRatioEpsilon = 1e-9;

struct FeatureDef {
  std::string name;
  std::vector<int> channels;
  std::string locality;  // "local" | "contextual"
  std::string kind;      // "intra" | "inter"
};

struct FeatureSchema {
  std::string id;
  int n_channels = 0;
  std::vector<FeatureDef> defs;

  int n_tot() const { return static_cast<int>(defs.size()); }
  std::vector<std::string> names() const;
};

FeatureSchema default_schema(int n_channels);
/// UnknownSchema for anything other than the default id.
FeatureSchema schema_by_id(const std::string& id, int n_channels);

/// Median with the mean of the two middle values for even counts; reorders `values`.
double median_inplace(std::vector<float>& values);

/// Raw descriptors of every patch of layer r >= 1 (rows in patch-id order).
MatrixXd layer_features(const LabeledVolume& volume, const Pyramid& pyramid, int layer, int threads = 1);

/// Raw descriptor of one patch; same values as the corresponding layer_features row.
VectorXd extract_features(const LabeledVolume& volume, const Pyramid& pyramid, int layer, PatchId id);

/// Voxel-layer descriptor: the channel intensities.
VectorXd voxel_features(const LabeledVolume& volume, int i, int j, int k);

// ---------------------------------------------------------------------------
// Quadratic expansion [f; f_i f_j (i < j, lexicographic); f_i^2].

inline int n_squared(int n) { return 2 * n + n * (n - 1) / 2; }

/// (i, j) factors of squared-feature index k over n inputs; j = -1 for a linear term.
std::pair<int, int> squared_factors(int n, int k);
/// Inverse of squared_factors; j = -1 selects a linear term, i == j a square.
int squared_index(int n, int i, int j);

VectorXd square_features(const VectorXd& selected);
MatrixXd square_rows(const MatrixXd& rows);

/// Value of squared-feature index k computed from the inputs it depends on only.
double squared_feature_value(const VectorXd& inputs, int k);

/// Index in the expansion of all n_tot raw features that corresponds to local
/// index k of the expansion of the sorted raw subset `subset`.
int global_squared_index(int n_tot, const std::vector<int>& subset, int k);
std::string squared_feature_name(const std::vector<std::string>& raw_names, int k);

// ---------------------------------------------------------------------------
// Tree feature subsets.

/// floor(sqrt(n_tot)).
int n_selected(int n_tot);

/// One seeded permutation of {0..n_tot-1} cut into n_trees blocks of n_sel,
/// each block sorted. TooManyTrees when n_trees * n_sel > n_tot.
std::vector<std::vector<int>> tree_feature_sets(int n_tot, int n_trees, int n_sel, std::uint64_t seed);
/// Block w (1-based) of tree_feature_sets with n_trees = n_sel = floor(sqrt(n_tot)).
std::vector<int> select_tree_features(int n_tot, int w, std::uint64_t seed);

}  // namespace hqrf
