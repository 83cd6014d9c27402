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

// Random search over discrete hyperparameter grids. A completed trial stops
// the search when its combined score (mean of macro precision and recall) is
// not strictly greater than the best of the up to 20 completed trials before
// it. Failed trials are logged and skipped by the rule.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hqrf/forest.hpp"

namespace hqrf {

inline constexpr int kStopWindow = 20;

struct Grids {
  std::vector<int> d1;
  std::vector<double> g_tree;
  std::vector<double> lambda;
};

/// d1 in 1..10, g_tree in 1e-6..1e-1 by decades, lambda in 0.01..0.99 by 0.01.
Grids default_grids();
Grids grids_from_json(const nlohmann::json& j);

struct TrialRecord {
  int index = 0;
  Hyperparams hyper;
  double precision = 0.0;
  double recall = 0.0;
  double combined = 0.0;
  double seconds = 0.0;
  bool failed = false;
  std::string error;
};

nlohmann::json trial_to_json(const TrialRecord& t);

/// True when the last entry of `completed` ends the search.
bool stop_after(const std::vector<double>& completed);

/// Draws one value per grid for every layer-independent field and every layer lambda.
Hyperparams sample_hyperparams(const Hyperparams& base, const Grids& grids, std::uint64_t seed, int trial);

using TrainFn = std::function<Model(const Hyperparams&)>;
using EvalFn = std::function<std::pair<double, double>(const Model&)>;  // (macro precision, macro recall)

struct SearchResult {
  std::optional<Model> best;
  int best_trial = -1;
  double best_combined = 0.0;
  std::vector<TrialRecord> log;
  bool stopped_early = false;
};

SearchResult random_search(const Hyperparams& base, const Grids& grids, std::uint64_t seed, int max_trials,
                           const TrainFn& train, const EvalFn& evaluate);

}  // namespace hqrf
