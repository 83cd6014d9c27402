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

// Hierarchical random forest over the patch pyramid.
//
// A tree consumes one pyramid layer per level from the coarsest layer down.
// A decision node at layer r >= 2 balances its samples, fits a sparse
// discriminant on the quadratic expansion of the tree's feature subset, and
// sends the eight octant children of every sample to the branch of the
// sample's estimated class. Layer-1 nodes route the samples themselves until
// a leaf condition holds; leaves keep voxelwise label statistics.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hqrf/discriminant.hpp"
#include "hqrf/features.hpp"
#include "hqrf/normalizer.hpp"
#include "hqrf/pyramid.hpp"
#include "hqrf/types.hpp"
#include "hqrf/volume.hpp"

namespace hqrf {

struct Hyperparams {
  int n_layers = 5;
  int d1 = 4;
  double g_tree = 1e-3;
  std::vector<double> lambdas;  // lambdas[r-1] is used at layer r
  std::uint64_t seed = 1;
  int n_grid = 32;
  int max_iters = 1000;
  double tol = 1e-7;

  int d_tree() const { return (n_layers - 1) + d1; }
  double lambda(int layer) const { return lambdas.at(static_cast<std::size_t>(layer - 1)); }
  /// BadConfig on out-of-range values.
  void validate() const;
};

struct TreeNode {
  int layer = 0;
  int depth = 0;
  bool leaf = false;
  std::vector<ClassIndex> classes;  // global ids of the classes the node separates
  std::vector<double> probs;        // n_classes, sums to 1
  double accuracy = 1.0;
  double difficulty = 0.0;
  std::optional<NodeDiscriminant<double>> disc;  // absent for leaves and single-class nodes
  std::vector<int> children;                     // per global class; -1 = pruned
  // training bookkeeping
  std::int64_t n_samples = 0;
  std::int64_t n_balanced = 0;
  bool converged = true;
  bool degenerate_scores = false;
  std::vector<std::vector<std::int64_t>> partition;  // [assigned local][true local], in-memory only

  bool passthrough() const { return !leaf && !disc; }
};

struct Tree {
  int index = 1;  // 1-based
  std::uint64_t seed = 0;
  std::vector<int> features;  // sorted raw feature ids
  std::vector<TreeNode> nodes;  // nodes[0] is the root
};

struct Model {
  int format_version = 1;
  FeatureSchema schema;
  int n_classes = 0;
  std::vector<std::string> class_names;
  Hyperparams hyper;
  std::vector<Normalizer<double>> layer_norms;  // [r-1], raw-feature standardisation
  std::vector<Tree> trees;

  int n_layers() const { return hyper.n_layers; }
};

// ---------------------------------------------------------------------------
// Training data.

struct PreparedVolume {
  const LabeledVolume* volume = nullptr;
  Pyramid pyramid;
  std::vector<MatrixXd> features;                     // [r], r >= 1; [0] unused
  std::vector<std::vector<ClassIndex>> ref_labels;    // [r], labelled volumes only
  std::vector<std::vector<double>> heterogeneity;     // [r]
  std::vector<std::vector<std::int64_t>> voxel_hist;  // layer-1 patch histograms (flattened n_classes)
};

struct PhaseTimes {
  double pyramid = 0.0;
  double features = 0.0;
  double smote = 0.0;
  double tree_optimization = 0.0;
};

PreparedVolume prepare_volume(const LabeledVolume& volume, int n_layers, int n_classes, int threads,
                              PhaseTimes* times = nullptr);

struct TrainReport {
  PhaseTimes times;
  bool degenerate = false;  // a single class present in the training data
  int n_trees = 0;
  std::vector<std::string> tree_errors;
  int n_nodes = 0;
  int n_leaves = 0;
  int n_pruned_branches = 0;
  int n_not_converged = 0;
};

/// Grows one tree (w is 1-based). normalized[v][r] holds the standardised raw
/// features of volume v at layer r.
Tree grow_tree(const std::vector<PreparedVolume>& data, const std::vector<std::vector<MatrixXd>>& normalized, int w,
               int n_weak, const std::vector<int>& features, int n_classes, const Hyperparams& hyper,
               double* smote_seconds = nullptr);

Model train_forest(const std::vector<PreparedVolume>& data, int n_classes, const Hyperparams& hyper, int threads,
                   TrainReport* report = nullptr);

/// Fits the layer raw-feature normalizer; with fewer than two rows the stds are 1.
Normalizer<double> fit_layer_normalizer(const MatrixXd& rows);

// ---------------------------------------------------------------------------
// Prediction.

struct NodeVisit {
  std::vector<double> probs;
  double accuracy = 1.0;
  double difficulty = 0.0;
};

struct Prediction {
  std::vector<double> probs;
  ClassIndex label = 0;
  double reliability = 1.0;
};

/// a = softmax(mean_w accuracy_w * p_w), label = argmax a, h* = exp(-mean_w difficulty_w).
Prediction aggregate(const std::vector<NodeVisit>& visits, int n_classes);

struct LayerPrediction {
  MatrixXd probs;  // n_patches x n_classes
  std::vector<ClassIndex> labels;
  VectorXd reliability;
};

struct PredictOptions {
  bool batch_normalize = false;
  bool voxels = true;
  int threads = 1;
};

struct VolumePrediction {
  std::vector<LayerPrediction> layers;  // [r], r = 0 filled when options.voxels
  std::vector<std::vector<std::vector<int>>> visits;  // [tree][r][patch] node index whose params were used
};

VolumePrediction predict_volume(const Model& model, const PreparedVolume& volume, const PredictOptions& options);

// ---------------------------------------------------------------------------
// Feature-index consolidation over the expansion of all raw features.

/// Global squared-feature ids selected by the decision nodes of one tree node.
std::vector<int> node_global_indices(const Model& model, const Tree& tree, const TreeNode& node);
/// Sorted union over the decision nodes of layer r.
std::vector<int> consolidate_resolution_specific(const Model& model, int layer);

struct IndependentSelection {
  std::vector<int> indices;
  bool fallback = false;  // every score tied with the median; the full union is returned
};

/// Keeps the ids whose score is strictly above the median score.
IndependentSelection select_above_median(const std::vector<std::pair<int, double>>& scored);
IndependentSelection consolidate_resolution_independent(const Model& model);

}  // namespace hqrf
