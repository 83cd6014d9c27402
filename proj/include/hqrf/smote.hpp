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

// Multiclass oversampling by convex interpolation between same-class nearest
// neighbours. Every minority class is raised to the majority count; the
// interpolation weight m = w / (n_weak + 1) is fixed per tree so that trees
// see different synthetic points.

#include <cstdint>
#include <span>
#include <vector>

#include "hqrf/types.hpp"

namespace hqrf {

struct BalancePlan {
  ClassIndex majority = 0;
  std::vector<std::int64_t> counts;
  std::vector<double> rates;  // percent; 0 for absent classes
  std::vector<int> n_neigh;   // 0 where no synthesis is needed

  std::int64_t target() const { return counts[static_cast<std::size_t>(majority)]; }
};

/// SingleClass when fewer than two classes are present.
BalancePlan plan_balancing(std::span<const ClassIndex> labels, int n_classes);

double smote_weight(int w, int n_weak);

struct BalancedSet {
  MatrixXd features;
  std::vector<ClassIndex> labels;
  std::vector<double> heterogeneity;
  std::vector<char> synthetic;
  // Source rows of synthetic samples (first = interpolated sample, second =
  // neighbour); -1 for realistic rows. Duplicates have both set to the source.
  std::vector<std::pair<std::int64_t, std::int64_t>> parents;
  std::vector<ClassIndex> duplicated_classes;  // classes with a single realistic sample
  double weight = 0.0;

  Eigen::Index size() const { return features.rows(); }
};

/// Realistic rows come first in input order, followed by the synthetic rows
/// grouped by class and source sample. Bit-reproducible for a fixed seed.
BalancedSet smote_balance(const MatrixXd& features, std::span<const ClassIndex> labels,
                          std::span<const double> heterogeneity, const BalancePlan& plan, int w, int n_weak,
                          std::uint64_t seed);

/// Indices of the k nearest rows in `candidates` to row `query` of `features`
/// (excluding the query itself), by Euclidean distance, ties to smaller index.
std::vector<std::int64_t> nearest_neighbors(const MatrixXd& features, std::int64_t query,
                                            std::span<const std::int64_t> candidates, int k);

}  // namespace hqrf
