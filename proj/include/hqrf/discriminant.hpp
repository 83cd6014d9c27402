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

// Per-node linear discriminant over (squared) features: projecting
// coefficients from sparse discriminant directions, class scores, the
// Gini-minimising offset search, and the quadratic discriminant baseline.
//
// Offsets: a sample is assigned to argmax_c (score_c - offset_c) with
// offset_0 = 0, ties going to the smallest class index. With two classes this
// is the usual single threshold on score_1 - score_0.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "hqrf/core_stats.hpp"
#include "hqrf/error.hpp"
#include "hqrf/msda.hpp"
#include "hqrf/normalizer.hpp"
#include "hqrf/types.hpp"

namespace hqrf {

/// beta_0 solves (S + jitter I) beta_0 = mu_0 by LDLT; beta_c = theta_c + beta_0.
/// `jitter` is the initial ridge; it is escalated when the factorisation fails.
template <typename Scalar>
Matrix<Scalar> betas_from_directions(const Matrix<Scalar>& theta, const Matrix<Scalar>& within_cov,
                                     const Matrix<Scalar>& class_means, Scalar jitter = Scalar(0)) {
  const Eigen::Index p = within_cov.cols();
  if (theta.cols() != p || class_means.cols() != p || theta.rows() != class_means.rows())
    throw Error(ErrorKind::kDimensionMismatch, "betas_from_directions shape mismatch");

  const Vector<Scalar> mu0 = class_means.row(0).transpose();
  Scalar scale = within_cov.trace() / static_cast<Scalar>(p);
  if (!(scale > Scalar(0))) scale = Scalar(1);
  Scalar ridge = jitter;
  if (within_cov.diagonal().minCoeff() < Scalar(1e-12)) ridge = std::max(ridge, Scalar(1e-10) * scale);

  for (int attempt = 0; attempt < 12; ++attempt) {
    Matrix<Scalar> reg = within_cov;
    reg.diagonal().array() += ridge;
    Eigen::LDLT<Matrix<Scalar>> ldlt(reg);
    if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
      const Vector<Scalar> beta0 = ldlt.solve(mu0);
      if (beta0.allFinite()) {
        Matrix<Scalar> betas = theta;
        betas.rowwise() += beta0.transpose();
        return betas;
      }
    }
    ridge = ridge > Scalar(0) ? ridge * Scalar(100) : Scalar(1e-10) * scale;
  }
  throw Error(ErrorKind::kSingularCovariance, "reference-class coefficient solve failed");
}

/// score_c = log(pi_c) + beta_c' (f - mu_c / 2)
template <typename Scalar>
Vector<Scalar> lda_scores(const Vector<Scalar>& f, const Matrix<Scalar>& betas, const Matrix<Scalar>& class_means,
                          const Vector<Scalar>& log_priors) {
  if (f.size() != betas.cols() || class_means.rows() != betas.rows() || class_means.cols() != betas.cols() ||
      log_priors.size() != betas.rows())
    throw Error(ErrorKind::kDimensionMismatch, "lda_scores shape mismatch");
  Vector<Scalar> s(betas.rows());
  for (Eigen::Index c = 0; c < betas.rows(); ++c)
    s[c] = log_priors[c] + betas.row(c).dot(f.transpose() - class_means.row(c) / Scalar(2));
  return s;
}

/// [f' beta_0, ..., f' beta_{K-1}]
template <typename Scalar>
Vector<Scalar> project(const Vector<Scalar>& f, const Matrix<Scalar>& betas) {
  if (f.size() != betas.cols()) throw Error(ErrorKind::kDimensionMismatch, "project shape mismatch");
  return betas * f;
}

/// Argmax of (score_c - offset_c), offset_0 = 0, ties to the smallest index.
template <typename Derived, typename Offsets>
ClassIndex argmax_with_offsets(const Eigen::MatrixBase<Derived>& scores, const Offsets& offsets) {
  using Scalar = typename Derived::Scalar;
  ClassIndex best = 0;
  Scalar best_value = scores[0];
  for (Eigen::Index c = 1; c < scores.size(); ++c) {
    const Scalar v = scores[c] - static_cast<Scalar>(offsets[c - 1]);
    if (v > best_value) {
      best_value = v;
      best = static_cast<ClassIndex>(c);
    }
  }
  return best;
}

template <typename Scalar>
std::vector<ClassIndex> assign_with_offsets(const Matrix<Scalar>& scores, const std::vector<Scalar>& offsets) {
  if (static_cast<Eigen::Index>(offsets.size()) + 1 != scores.cols())
    throw Error(ErrorKind::kDimensionMismatch, "offset count must be n_classes - 1");
  std::vector<ClassIndex> out(static_cast<std::size_t>(scores.rows()));
  for (Eigen::Index i = 0; i < scores.rows(); ++i)
    out[static_cast<std::size_t>(i)] = argmax_with_offsets(scores.row(i).transpose(), offsets);
  return out;
}

/// Candidate offsets for one class: n_grid equally spaced quantiles of the
/// observed margins, plus zero, sorted and deduplicated.
template <typename Scalar>
std::vector<Scalar> threshold_grid(std::vector<Scalar> margins, int n_grid) {
  if (margins.empty()) return {Scalar(0)};
  std::sort(margins.begin(), margins.end());
  std::vector<Scalar> grid;
  grid.reserve(static_cast<std::size_t>(n_grid) + 1);
  const auto last = margins.size() - 1;
  for (int i = 0; i < n_grid; ++i) {
    const double level = n_grid == 1 ? 0.5 : static_cast<double>(i) / static_cast<double>(n_grid - 1);
    const double pos = level * static_cast<double>(last);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, last);
    const Scalar frac = static_cast<Scalar>(pos - static_cast<double>(lo));
    grid.push_back(margins[lo] + frac * (margins[hi] - margins[lo]));
  }
  grid.push_back(Scalar(0));
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

template <typename Scalar>
struct ThresholdResult {
  std::vector<Scalar> offsets;  // n_classes - 1
  double gini = 0.0;
  bool degenerate = false;
};

namespace detail {

using CountTable = std::vector<std::vector<std::int64_t>>;

inline CountTable zero_table(int k) {
  return CountTable(static_cast<std::size_t>(k), std::vector<std::int64_t>(static_cast<std::size_t>(k), 0));
}

template <typename Scalar>
double offsets_l1(const std::vector<Scalar>& offsets) {
  double s = 0.0;
  for (auto v : offsets) s += std::abs(static_cast<double>(v));
  return s;
}

/// Sweeps offset q over `grid` with the other offsets fixed. Returns
/// (best gini, best grid index) with ties resolved toward smaller |offset|.
template <typename Scalar>
std::pair<double, std::size_t> sweep_coordinate(const Matrix<Scalar>& scores, std::span<const ClassIndex> labels,
                                                int k, std::vector<Scalar> offsets, int q,
                                                const std::vector<Scalar>& grid) {
  const std::size_t g = grid.size();
  // by_pos[pos][label]: samples that go to q for grid indices < pos.
  std::vector<std::vector<std::int64_t>> q_by_pos(g + 1, std::vector<std::int64_t>(static_cast<std::size_t>(k), 0));
  std::vector<CountTable> other_by_pos(g + 1, zero_table(k));

  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    ClassIndex other = -1;
    Scalar other_value = Scalar(0);
    for (int c = 0; c < k; ++c) {
      if (c == q) continue;
      const Scalar v = scores(i, c) - (c == 0 ? Scalar(0) : offsets[static_cast<std::size_t>(c - 1)]);
      if (other < 0 || v > other_value) {
        other = c;
        other_value = v;
      }
    }
    // Same comparison as argmax_with_offsets; rounding of s_q - tau is
    // monotone in tau, so the samples sent to q form a prefix of the grid.
    const Scalar sq = scores(i, q);
    const auto goes_to_q = [&](Scalar tau) {
      const Scalar v = sq - tau;
      return v > other_value || (v == other_value && q < other);
    };
    const auto pos = static_cast<std::size_t>(std::partition_point(grid.begin(), grid.end(), goes_to_q) - grid.begin());
    const auto label = static_cast<std::size_t>(labels[static_cast<std::size_t>(i)]);
    ++q_by_pos[pos][label];
    ++other_by_pos[pos][static_cast<std::size_t>(other)][label];
  }

  // Suffix sums for q (pos > j), prefix sums for the others (pos <= j).
  std::vector<std::int64_t> q_counts(static_cast<std::size_t>(k), 0);
  for (std::size_t p = 1; p <= g; ++p)
    for (int l = 0; l < k; ++l) q_counts[static_cast<std::size_t>(l)] += q_by_pos[p][static_cast<std::size_t>(l)];
  CountTable others = zero_table(k);

  double best_gini = std::numeric_limits<double>::infinity();
  std::size_t best_index = 0;
  double best_l1 = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < g; ++j) {
    for (int a = 0; a < k; ++a)
      for (int l = 0; l < k; ++l)
        others[static_cast<std::size_t>(a)][static_cast<std::size_t>(l)] +=
            other_by_pos[j][static_cast<std::size_t>(a)][static_cast<std::size_t>(l)];
    if (j > 0)
      for (int l = 0; l < k; ++l) q_counts[static_cast<std::size_t>(l)] -= q_by_pos[j][static_cast<std::size_t>(l)];

    CountTable table = others;
    for (int l = 0; l < k; ++l) table[static_cast<std::size_t>(q)][static_cast<std::size_t>(l)] += q_counts[static_cast<std::size_t>(l)];
    const double gini = gini_of_partition_counts(table);
    offsets[static_cast<std::size_t>(q - 1)] = grid[j];
    const double l1 = offsets_l1(offsets);
    if (gini < best_gini || (gini == best_gini && l1 < best_l1)) {
      best_gini = gini;
      best_index = j;
      best_l1 = l1;
    }
  }
  return {best_gini, best_index};
}

template <typename Scalar>
double partition_gini(const Matrix<Scalar>& scores, std::span<const ClassIndex> labels, int k,
                      const std::vector<Scalar>& offsets) {
  CountTable table = zero_table(k);
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    const ClassIndex a = argmax_with_offsets(scores.row(i).transpose(), offsets);
    ++table[static_cast<std::size_t>(a)][static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
  }
  return gini_of_partition_counts(table);
}

template <typename Scalar>
ThresholdResult<Scalar> optimize_two_class(const Matrix<Scalar>& scores, std::span<const ClassIndex> labels) {
  const auto n = static_cast<std::size_t>(scores.rows());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<Scalar> margin(n);
  for (std::size_t i = 0; i < n; ++i) margin[i] = scores(static_cast<Eigen::Index>(i), 1) - scores(static_cast<Eigen::Index>(i), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return margin[a] < margin[b]; });

  // Threshold below every margin: all samples go to class 1.
  std::vector<std::int64_t> low(2, 0), high(2, 0);
  for (std::size_t i = 0; i < n; ++i) ++high[static_cast<std::size_t>(labels[i])];

  auto evaluate = [&]() { return gini_of_partition_counts({low, high}); };
  ThresholdResult<Scalar> best;
  best.offsets = {margin[order[0]] - std::max(Scalar(1), std::abs(margin[order[0]]))};
  best.gini = evaluate();
  double best_abs = std::abs(static_cast<double>(best.offsets[0]));

  std::size_t i = 0;
  while (i < n) {
    const Scalar v = margin[order[i]];
    while (i < n && margin[order[i]] == v) {
      const auto l = static_cast<std::size_t>(labels[order[i]]);
      ++low[l];
      --high[l];
      ++i;
    }
    const Scalar tau = i < n ? v + (margin[order[i]] - v) / Scalar(2) : v;
    const double gini = evaluate();
    const double a = std::abs(static_cast<double>(tau));
    if (gini < best.gini || (gini == best.gini && a < best_abs)) {
      best.gini = gini;
      best.offsets = {tau};
      best_abs = a;
    }
  }
  return best;
}

}  // namespace detail

/// Exhaustive offset search minimising the weighted Gini of the induced
/// partition. Two classes: exact sweep over all midpoints of sorted margins.
/// Up to four classes: full Cartesian product of per-class grids. More
/// classes: cyclic coordinate sweeps from the zero offsets.
template <typename Scalar>
ThresholdResult<Scalar> optimize_thresholds(const Matrix<Scalar>& scores, std::span<const ClassIndex> labels,
                                            int n_grid = 32) {
  const int k = static_cast<int>(scores.cols());
  if (scores.rows() < 2) throw Error(ErrorKind::kInsufficientSamples, "threshold search needs two samples");
  if (k < 2) throw Error(ErrorKind::kInsufficientSamples, "threshold search needs two classes");
  if (static_cast<Eigen::Index>(labels.size()) != scores.rows())
    throw Error(ErrorKind::kDimensionMismatch, "labels and scores disagree in length");
  for (auto l : labels)
    if (l < 0 || l >= k) throw Error(ErrorKind::kDimensionMismatch, "label outside score columns");

  bool degenerate = true;
  std::vector<std::vector<Scalar>> margins(static_cast<std::size_t>(k - 1));
  for (int c = 1; c < k; ++c) {
    auto& m = margins[static_cast<std::size_t>(c - 1)];
    m.resize(static_cast<std::size_t>(scores.rows()));
    for (Eigen::Index i = 0; i < scores.rows(); ++i) m[static_cast<std::size_t>(i)] = scores(i, c) - scores(i, 0);
    const auto [lo, hi] = std::minmax_element(m.begin(), m.end());
    if (*hi > *lo) degenerate = false;
  }
  if (degenerate) {
    ThresholdResult<Scalar> r;
    r.offsets.assign(static_cast<std::size_t>(k - 1), Scalar(0));
    r.gini = detail::partition_gini(scores, labels, k, r.offsets);
    r.degenerate = true;
    return r;
  }

  if (k == 2) return detail::optimize_two_class(scores, labels);

  std::vector<std::vector<Scalar>> grids;
  for (auto& m : margins) grids.push_back(threshold_grid(m, n_grid));

  ThresholdResult<Scalar> best;
  best.offsets.assign(static_cast<std::size_t>(k - 1), Scalar(0));
  best.gini = detail::partition_gini(scores, labels, k, best.offsets);
  double best_l1 = 0.0;

  if (k - 1 <= 3) {
    // Odometer over offsets 1..k-2, bucketed sweep over the last one.
    const int outer = k - 2;
    std::vector<std::size_t> idx(static_cast<std::size_t>(outer), 0);
    std::vector<Scalar> offsets(static_cast<std::size_t>(k - 1), Scalar(0));
    while (true) {
      for (int c = 0; c < outer; ++c)
        offsets[static_cast<std::size_t>(c)] = grids[static_cast<std::size_t>(c)][idx[static_cast<std::size_t>(c)]];
      const auto [gini, j] = detail::sweep_coordinate(scores, labels, k, offsets, k - 1, grids.back());
      offsets.back() = grids.back()[j];
      const double l1 = detail::offsets_l1(offsets);
      if (gini < best.gini || (gini == best.gini && l1 < best_l1)) {
        best.gini = gini;
        best.offsets = offsets;
        best_l1 = l1;
      }
      int c = 0;
      for (; c < outer; ++c) {
        auto& i = idx[static_cast<std::size_t>(c)];
        if (++i < grids[static_cast<std::size_t>(c)].size()) break;
        i = 0;
      }
      if (c == outer) break;
    }
    return best;
  }

  for (int round = 0; round < 100; ++round) {
    bool improved = false;
    for (int q = 1; q < k; ++q) {
      const auto& grid = grids[static_cast<std::size_t>(q - 1)];
      const auto [gini, j] = detail::sweep_coordinate(scores, labels, k, best.offsets, q, grid);
      if (gini < best.gini) {
        best.gini = gini;
        best.offsets[static_cast<std::size_t>(q - 1)] = grid[j];
        improved = true;
      }
    }
    if (!improved) break;
  }
  return best;
}

/// argmax_c [log pi_c - log|S_c| / 2 - (f - mu_c)' S_c^-1 (f - mu_c) / 2]
template <typename Scalar>
ClassIndex qda_classify(const Vector<Scalar>& f, const Matrix<Scalar>& class_means,
                        const std::vector<Matrix<Scalar>>& class_covs, const Vector<Scalar>& priors) {
  const Eigen::Index k = class_means.rows();
  if (static_cast<Eigen::Index>(class_covs.size()) != k || priors.size() != k || f.size() != class_means.cols())
    throw Error(ErrorKind::kDimensionMismatch, "qda_classify shape mismatch");
  ClassIndex best = 0;
  Scalar best_value = -std::numeric_limits<Scalar>::infinity();
  for (Eigen::Index c = 0; c < k; ++c) {
    const auto& cov = class_covs[static_cast<std::size_t>(c)];
    Matrix<Scalar> reg = cov;
    Eigen::LLT<Matrix<Scalar>> llt(reg);
    if (llt.info() != Eigen::Success) {
      Scalar scale = cov.trace() / static_cast<Scalar>(cov.cols());
      if (!(scale > Scalar(0))) scale = Scalar(1);
      reg.diagonal().array() += Scalar(1e-10) * scale;
      llt.compute(reg);
      if (llt.info() != Eigen::Success)
        throw Error(ErrorKind::kSingularCovariance, "class " + std::to_string(c + 1) + " covariance not invertible");
    }
    const Vector<Scalar> dev = f - class_means.row(c).transpose();
    const Vector<Scalar> w = llt.matrixL().solve(dev);
    const Scalar log_det = Scalar(2) * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    const Scalar value = std::log(priors[c]) - log_det / Scalar(2) - w.squaredNorm() / Scalar(2);
    if (value > best_value) {
      best_value = value;
      best = static_cast<ClassIndex>(c);
    }
  }
  return best;
}

// ---------------------------------------------------------------------------

/// Fitted discriminant of one decision node. Classes are local indices into
/// the node's class list; betas/class_means are over normalised features.
template <typename Scalar>
struct NodeDiscriminant {
  Matrix<Scalar> betas;        // K x p
  Matrix<Scalar> class_means;  // K x p
  Vector<Scalar> log_priors;   // K
  std::vector<Scalar> thresholds;
  std::vector<int> selected_indices;
  Vector<Scalar> norm_means;
  Vector<Scalar> norm_stds;

  Eigen::Index n_classes() const { return betas.rows(); }
  Eigen::Index n_features() const { return betas.cols(); }

  /// theta_c = beta_c - beta_0 restricted to the selected features, and the
  /// per-class constants of the reference-class form
  ///   log(pi_c / pi_0) + theta_c' (f - (mu_0 + mu_c) / 2).
  void finalize() {
    const Eigen::Index k = n_classes();
    const auto m = static_cast<Eigen::Index>(selected_indices.size());
    theta_selected_.resize(k, m);
    bias_.resize(k);
    for (Eigen::Index c = 0; c < k; ++c) {
      Scalar b = log_priors[c] - log_priors[0];
      for (Eigen::Index j = 0; j < m; ++j) {
        const int h = selected_indices[static_cast<std::size_t>(j)];
        const Scalar t = betas(c, h) - betas(0, h);
        theta_selected_(c, j) = t;
        b -= t * (class_means(0, h) + class_means(c, h)) / Scalar(2);
      }
      bias_[c] = b;
    }
  }

  /// Reference-class scores from normalised values of the selected features only.
  Vector<Scalar> decision_scores_selected(const Vector<Scalar>& selected_normalized) const {
    return bias_ + theta_selected_ * selected_normalized;
  }

  /// Reference-class scores for a full normalised feature vector.
  Vector<Scalar> decision_scores(const Vector<Scalar>& normalized) const {
    Vector<Scalar> sel(static_cast<Eigen::Index>(selected_indices.size()));
    for (std::size_t j = 0; j < selected_indices.size(); ++j)
      sel[static_cast<Eigen::Index>(j)] = normalized[selected_indices[j]];
    return decision_scores_selected(sel);
  }

  /// Normalises a raw (unnormalised) value of selected feature slot j.
  Scalar normalize_selected(std::size_t j, Scalar raw) const {
    const int h = selected_indices[j];
    return (raw - norm_means[h]) / norm_stds[h];
  }

  ClassIndex classify_scores(const Vector<Scalar>& scores) const { return argmax_with_offsets(scores, thresholds); }

 private:
  Matrix<Scalar> theta_selected_;
  Vector<Scalar> bias_;
};

struct DiscriminantOptions {
  double lambda = 0.0;
  int max_iters = 1000;
  double tol = 1e-7;
  int n_grid = 32;
};

template <typename Scalar>
struct DiscriminantFit {
  NodeDiscriminant<Scalar> disc;
  double min_gini = 0.0;
  bool converged = true;
  int iterations = 0;
  bool degenerate_scores = false;
  std::vector<ClassIndex> assignments;  // thresholded labels of the fitting samples
};

/// Fits the node discriminant on raw squared features with local labels in
/// [0, n_classes); every class must be present.
template <typename Scalar>
DiscriminantFit<Scalar> fit_discriminant(const Matrix<Scalar>& raw, std::span<const ClassIndex> labels, int n_classes,
                                         const DiscriminantOptions& opt) {
  DiscriminantFit<Scalar> fit;
  auto& d = fit.disc;
  const Normalizer<Scalar> norm = fit_normalizer(raw);
  d.norm_means = norm.means;
  d.norm_stds = norm.stds;

  LabeledSampleSet<Scalar> data;
  data.features = norm.apply_rows(raw);
  data.labels.assign(labels.begin(), labels.end());
  data.n_classes = n_classes;
  const auto moments = class_means_priors(data);
  const Eigen::Index p = raw.cols();
  Matrix<Scalar> within = Matrix<Scalar>::Zero(p, p);
  if (data.n_samples() > n_classes) within = within_class_covariance(data, moments.class_means).first;

  MsdaProblem<Scalar> problem;
  problem.within_cov = within;
  problem.delta = moments.class_means.bottomRows(n_classes - 1).rowwise() - moments.class_means.row(0);
  problem.lambda = static_cast<Scalar>(opt.lambda);
  problem.max_iters = opt.max_iters;
  problem.tol = static_cast<Scalar>(opt.tol);
  const auto dirs = solve_msda(problem);
  fit.converged = dirs.converged;
  fit.iterations = dirs.iterations_used;

  d.betas = betas_from_directions(dirs.theta, within, moments.class_means);
  d.class_means = moments.class_means;
  d.log_priors = moments.priors.array().log().matrix();
  d.selected_indices = dirs.active_features;
  d.thresholds.assign(static_cast<std::size_t>(n_classes - 1), Scalar(0));
  d.finalize();

  Matrix<Scalar> scores(data.n_samples(), n_classes);
  for (Eigen::Index i = 0; i < data.n_samples(); ++i)
    scores.row(i) = d.decision_scores(data.features.row(i).transpose()).transpose();
  const auto thr = optimize_thresholds(scores, labels, opt.n_grid);
  d.thresholds = thr.offsets;
  fit.min_gini = thr.gini;
  fit.degenerate_scores = thr.degenerate;
  fit.assignments = assign_with_offsets(scores, d.thresholds);
  return fit;
}

}  // namespace hqrf
