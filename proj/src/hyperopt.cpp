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

#include "hqrf/hyperopt.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

#include "hqrf/error.hpp"
#include "hqrf/model_io.hpp"

namespace hqrf {

Grids default_grids() {
  Grids g;
  for (int d = 1; d <= 10; ++d) g.d1.push_back(d);
  for (int e = -6; e <= -1; ++e) g.g_tree.push_back(std::pow(10.0, e));
  for (int i = 1; i <= 99; ++i) g.lambda.push_back(i / 100.0);
  return g;
}

Grids grids_from_json(const nlohmann::json& j) {
  Grids g = default_grids();
  if (j.contains("d1")) g.d1 = j.at("d1").get<std::vector<int>>();
  if (j.contains("g_tree")) g.g_tree = j.at("g_tree").get<std::vector<double>>();
  if (j.contains("lambda")) g.lambda = j.at("lambda").get<std::vector<double>>();
  if (g.d1.empty() || g.g_tree.empty() || g.lambda.empty()) throw Error(ErrorKind::kBadConfig, "grids must be nonempty");
  return g;
}

nlohmann::json trial_to_json(const TrialRecord& t) {
  nlohmann::json j{{"trial", t.index},
                   {"hyperparams", hyperparams_to_json(t.hyper)},
                   {"macro_precision", t.precision},
                   {"macro_recall", t.recall},
                   {"combined", t.combined},
                   {"seconds", t.seconds},
                   {"seed", t.hyper.seed},
                   {"failed", t.failed}};
  if (t.failed) j["error"] = t.error;
  return j;
}

bool stop_after(const std::vector<double>& completed) {
  const auto t = completed.size();
  if (t < 2) return false;
  const auto window = std::min<std::size_t>(kStopWindow, t - 1);
  const double best = *std::max_element(completed.end() - 1 - static_cast<std::ptrdiff_t>(window), completed.end() - 1);
  return completed.back() <= best;
}

Hyperparams sample_hyperparams(const Hyperparams& base, const Grids& grids, std::uint64_t seed, int trial) {
  std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(trial)));
  auto pick = [&](const auto& v) {
    std::uniform_int_distribution<std::size_t> d(0, v.size() - 1);
    return v[d(rng)];
  };
  Hyperparams h = base;
  h.d1 = pick(grids.d1);
  h.g_tree = pick(grids.g_tree);
  h.lambdas.resize(static_cast<std::size_t>(h.n_layers));
  for (auto& l : h.lambdas) l = pick(grids.lambda);
  return h;
}

SearchResult random_search(const Hyperparams& base, const Grids& grids, std::uint64_t seed, int max_trials,
                           const TrainFn& train, const EvalFn& evaluate) {
  if (max_trials < 1) throw Error(ErrorKind::kBadConfig, "max_trials must be at least 1");
  if (grids.d1.empty() || grids.g_tree.empty() || grids.lambda.empty())
    throw Error(ErrorKind::kBadConfig, "grids must be nonempty");
  SearchResult out;
  std::vector<double> completed;
  for (int trial = 0; trial < max_trials; ++trial) {
    TrialRecord rec;
    rec.index = trial;
    rec.hyper = sample_hyperparams(base, grids, seed, trial);
    const auto t0 = std::chrono::steady_clock::now();
    std::optional<Model> model;
    try {
      model = train(rec.hyper);
      std::tie(rec.precision, rec.recall) = evaluate(*model);
      rec.combined = (rec.precision + rec.recall) / 2.0;
    } catch (const std::exception& e) {
      rec.failed = true;
      rec.error = e.what();
    }
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.log.push_back(rec);
    if (rec.failed) continue;
    if (!out.best || rec.combined > out.best_combined) {
      out.best = std::move(model);
      out.best_trial = trial;
      out.best_combined = rec.combined;
    }
    completed.push_back(rec.combined);
    if (stop_after(completed)) {
      out.stopped_early = trial + 1 < max_trials;
      break;
    }
  }
  return out;
}

}  // namespace hqrf
