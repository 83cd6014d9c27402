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

#include "hqrf/smote.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "hqrf/core_stats.hpp"
#include "hqrf/error.hpp"

namespace hqrf {

BalancePlan plan_balancing(std::span<const ClassIndex> labels, int n_classes) {
  BalancePlan p;
  p.counts = class_counts(labels, n_classes);
  int present = 0;
  for (int c = 0; c < n_classes; ++c) {
    const auto n = p.counts[static_cast<std::size_t>(c)];
    if (n > 0) ++present;
    if (n > p.counts[static_cast<std::size_t>(p.majority)]) p.majority = c;
  }
  if (present < 2) throw Error(ErrorKind::kSingleClass, "balancing needs at least two classes");
  const double top = static_cast<double>(p.target());
  p.rates.assign(static_cast<std::size_t>(n_classes), 0.0);
  p.n_neigh.assign(static_cast<std::size_t>(n_classes), 0);
  for (int c = 0; c < n_classes; ++c) {
    const auto n = p.counts[static_cast<std::size_t>(c)];
    if (n == 0) continue;
    const double rate = 100.0 * top / static_cast<double>(n);
    p.rates[static_cast<std::size_t>(c)] = rate;
    if (n < p.target()) p.n_neigh[static_cast<std::size_t>(c)] = std::max(1, static_cast<int>(std::lround(rate / 100.0)));
  }
  return p;
}

double smote_weight(int w, int n_weak) {
  if (n_weak < 1 || w < 1 || w > n_weak) throw Error(ErrorKind::kBadConfig, "tree index outside 1..n_weak");
  return static_cast<double>(w) / static_cast<double>(n_weak + 1);
}

std::vector<std::int64_t> nearest_neighbors(const MatrixXd& features, std::int64_t query,
                                            std::span<const std::int64_t> candidates, int k) {
  std::vector<std::pair<double, std::int64_t>> d;
  d.reserve(candidates.size());
  for (auto c : candidates)
    if (c != query) d.emplace_back((features.row(c) - features.row(query)).squaredNorm(), c);
  const auto take = std::min<std::size_t>(static_cast<std::size_t>(std::max(k, 0)), d.size());
  std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(take), d.end());
  std::vector<std::int64_t> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.push_back(d[i].second);
  return out;
}

BalancedSet smote_balance(const MatrixXd& features, std::span<const ClassIndex> labels,
                          std::span<const double> heterogeneity, const BalancePlan& plan, int w, int n_weak,
                          std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(features.rows());
  if (labels.size() != n || heterogeneity.size() != n)
    throw Error(ErrorKind::kDimensionMismatch, "labels/heterogeneity do not match feature rows");
  const int n_classes = static_cast<int>(plan.counts.size());
  if (class_counts(labels, n_classes) != plan.counts)
    throw Error(ErrorKind::kDimensionMismatch, "plan does not match the sample labels");

  BalancedSet out;
  out.weight = smote_weight(w, n_weak);
  const double m = out.weight;

  std::vector<std::vector<std::int64_t>> members(static_cast<std::size_t>(n_classes));
  for (std::size_t i = 0; i < n; ++i) members[static_cast<std::size_t>(labels[i])].push_back(static_cast<std::int64_t>(i));

  std::int64_t total = static_cast<std::int64_t>(n);
  for (int c = 0; c < n_classes; ++c)
    if (plan.counts[static_cast<std::size_t>(c)] > 0) total += plan.target() - plan.counts[static_cast<std::size_t>(c)];

  out.features.resize(total, features.cols());
  out.features.topRows(static_cast<Eigen::Index>(n)) = features;
  out.labels.assign(labels.begin(), labels.end());
  out.heterogeneity.assign(heterogeneity.begin(), heterogeneity.end());
  out.synthetic.assign(n, 0);
  out.parents.assign(n, {-1, -1});

  std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(w)));
  Eigen::Index row = static_cast<Eigen::Index>(n);
  for (int c = 0; c < n_classes; ++c) {
    const auto& idx = members[static_cast<std::size_t>(c)];
    const auto n_c = static_cast<std::int64_t>(idx.size());
    if (n_c == 0) continue;
    const std::int64_t need = plan.target() - n_c;
    if (need <= 0) continue;
    if (n_c == 1) out.duplicated_classes.push_back(c);
    const int k = plan.n_neigh[static_cast<std::size_t>(c)];
    for (std::int64_t s = 0; s < n_c; ++s) {
      const std::int64_t count = need / n_c + (s < need % n_c ? 1 : 0);
      if (count == 0) continue;
      const std::int64_t src = idx[static_cast<std::size_t>(s)];
      const auto nbrs = nearest_neighbors(features, src, idx, k);
      for (std::int64_t t = 0; t < count; ++t) {
        std::int64_t nb = src;
        if (!nbrs.empty()) {
          std::uniform_int_distribution<std::size_t> pick(0, nbrs.size() - 1);
          nb = nbrs[pick(rng)];
        }
        for (Eigen::Index j = 0; j < features.cols(); ++j) {
          const double a = features(src, j), b = features(nb, j);
          out.features(row, j) = std::clamp(b + m * (a - b), std::min(a, b), std::max(a, b));
        }
        const double ha = heterogeneity[static_cast<std::size_t>(src)], hb = heterogeneity[static_cast<std::size_t>(nb)];
        out.heterogeneity.push_back(std::clamp(hb + m * (ha - hb), std::min(ha, hb), std::max(ha, hb)));
        out.labels.push_back(c);
        out.synthetic.push_back(1);
        out.parents.emplace_back(src, nb);
        ++row;
      }
    }
  }
  return out;
}

}  // namespace hqrf
