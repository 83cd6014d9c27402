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

// Class-conditional moments and label impurity measures.
//
// Labels are zero-based class indices in [0, n_classes). All routines are
// pure functions of their arguments.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "hqrf/error.hpp"
#include "hqrf/types.hpp"

namespace hqrf {

template <typename Scalar>
struct LabeledSampleSet {
  Matrix<Scalar> features;  // n_samples x n_dims
  std::vector<ClassIndex> labels;
  int n_classes = 0;
  Vector<Scalar> weights;  // empty means unit weights

  Eigen::Index n_samples() const { return features.rows(); }
  Eigen::Index n_dims() const { return features.cols(); }

  void validate() const {
    if (features.rows() < 1 || features.cols() < 1)
      throw Error(ErrorKind::kEmptySet, "sample set needs at least one sample and one dimension");
    if (static_cast<Eigen::Index>(labels.size()) != features.rows())
      throw Error(ErrorKind::kDimensionMismatch, "label count differs from feature rows");
    for (ClassIndex l : labels)
      if (l < 0 || l >= n_classes)
        throw Error(ErrorKind::kDimensionMismatch, "label " + std::to_string(l) + " outside class universe");
    if (weights.size() != 0) {
      if (weights.size() != features.rows())
        throw Error(ErrorKind::kDimensionMismatch, "weight count differs from feature rows");
      for (Eigen::Index i = 0; i < weights.size(); ++i)
        if (!std::isfinite(static_cast<double>(weights[i])) || weights[i] < Scalar(0))
          throw Error(ErrorKind::kDimensionMismatch, "weights must be finite and nonnegative");
    }
  }
};

template <typename Scalar>
struct ClassMoments {
  Matrix<Scalar> class_means;  // n_classes x n_dims
  Vector<Scalar> priors;
  Vector<Scalar> overall_mean;
  std::vector<std::int64_t> counts;
};

template <typename Scalar>
struct ClassStats {
  Matrix<Scalar> class_means;
  Vector<Scalar> priors;
  Vector<Scalar> overall_mean;
  Matrix<Scalar> within_cov;
  Matrix<Scalar> between_cov;
  std::int64_t dof = 0;
};

inline std::vector<std::int64_t> class_counts(std::span<const ClassIndex> labels, int n_classes) {
  std::vector<std::int64_t> counts(static_cast<std::size_t>(n_classes), 0);
  for (ClassIndex l : labels) {
    if (l < 0 || l >= n_classes)
      throw Error(ErrorKind::kDimensionMismatch, "label outside class universe");
    ++counts[static_cast<std::size_t>(l)];
  }
  return counts;
}

template <typename Scalar>
ClassMoments<Scalar> class_means_priors(const LabeledSampleSet<Scalar>& data) {
  data.validate();
  const int k = data.n_classes;
  ClassMoments<Scalar> m;
  m.counts = class_counts(data.labels, k);
  for (int c = 0; c < k; ++c)
    if (m.counts[static_cast<std::size_t>(c)] == 0)
      throw Error(ErrorKind::kEmptyClass, "class " + std::to_string(c + 1) + " has no samples");

  m.class_means = Matrix<Scalar>::Zero(k, data.n_dims());
  for (Eigen::Index i = 0; i < data.n_samples(); ++i)
    m.class_means.row(data.labels[static_cast<std::size_t>(i)]) += data.features.row(i);

  const std::int64_t total = data.n_samples();
  m.priors.resize(k);
  for (int c = 0; c < k; ++c) {
    const auto n = m.counts[static_cast<std::size_t>(c)];
    m.class_means.row(c) /= static_cast<Scalar>(n);
    m.priors[c] = static_cast<Scalar>(n) / static_cast<Scalar>(total);
  }
  m.overall_mean = m.class_means.transpose() * m.priors;
  return m;
}

/// Pooled unbiased within-class covariance with dof = N - n_classes.
/// Two-pass: the class means are subtracted before forming the scatter.
template <typename Scalar>
std::pair<Matrix<Scalar>, std::int64_t> within_class_covariance(const LabeledSampleSet<Scalar>& data,
                                                                 const Matrix<Scalar>& class_means) {
  data.validate();
  if (class_means.rows() != data.n_classes || class_means.cols() != data.n_dims())
    throw Error(ErrorKind::kDimensionMismatch, "class means shape mismatch");
  const std::int64_t dof = static_cast<std::int64_t>(data.n_samples()) - data.n_classes;
  if (dof < 1)
    throw Error(ErrorKind::kInsufficientSamples,
                "within-class covariance needs more samples than classes");

  Matrix<Scalar> centered = data.features;
  for (Eigen::Index i = 0; i < centered.rows(); ++i)
    centered.row(i) -= class_means.row(data.labels[static_cast<std::size_t>(i)]);
  Matrix<Scalar> cov = (centered.transpose() * centered) / static_cast<Scalar>(dof);
  cov = (cov + cov.transpose()) / Scalar(2);
  return {std::move(cov), dof};
}

template <typename Scalar>
Matrix<Scalar> between_class_covariance(const Matrix<Scalar>& class_means, const Vector<Scalar>& priors,
                                        const Vector<Scalar>& overall_mean) {
  if (class_means.rows() != priors.size() || class_means.cols() != overall_mean.size())
    throw Error(ErrorKind::kDimensionMismatch, "between-class covariance shape mismatch");
  const Eigen::Index d = class_means.cols();
  Matrix<Scalar> b = Matrix<Scalar>::Zero(d, d);
  for (Eigen::Index c = 0; c < class_means.rows(); ++c) {
    const Vector<Scalar> dev = class_means.row(c).transpose() - overall_mean;
    b.noalias() += priors[c] * dev * dev.transpose();
  }
  return b;
}

/// Maximum-likelihood (1/n_c) covariance of one class.
template <typename Scalar>
Matrix<Scalar> class_covariance(const LabeledSampleSet<Scalar>& data, ClassIndex class_id) {
  data.validate();
  std::vector<Eigen::Index> rows;
  for (Eigen::Index i = 0; i < data.n_samples(); ++i)
    if (data.labels[static_cast<std::size_t>(i)] == class_id) rows.push_back(i);
  if (rows.empty())
    throw Error(ErrorKind::kEmptyClass, "class " + std::to_string(class_id + 1) + " has no samples");

  Matrix<Scalar> x = data.features(rows, Eigen::all);
  const RowVector<Scalar> mean = x.colwise().mean();
  x.rowwise() -= mean;
  Matrix<Scalar> cov = (x.transpose() * x) / static_cast<Scalar>(rows.size());
  return (cov + cov.transpose()) / Scalar(2);
}

template <typename Scalar>
ClassStats<Scalar> compute_class_stats(const LabeledSampleSet<Scalar>& data) {
  auto m = class_means_priors(data);
  ClassStats<Scalar> s;
  auto [cov, dof] = within_class_covariance(data, m.class_means);
  s.within_cov = std::move(cov);
  s.dof = dof;
  s.between_cov = between_class_covariance(m.class_means, m.priors, m.overall_mean);
  s.class_means = std::move(m.class_means);
  s.priors = std::move(m.priors);
  s.overall_mean = std::move(m.overall_mean);
  return s;
}

// ---------------------------------------------------------------------------
// Impurities. Probabilities come from exact integer counts; the Gini numerator
// N^2 - sum n_c^2 is formed in integers so only the final division rounds.

inline double gini_from_counts(std::span<const std::int64_t> counts) {
  std::int64_t total = 0;
  std::int64_t sum_sq = 0;
  for (auto n : counts) {
    total += n;
    sum_sq += n * n;
  }
  if (total == 0) throw Error(ErrorKind::kEmptySet, "gini of an empty set");
  return static_cast<double>(total * total - sum_sq) / static_cast<double>(total * total);
}

inline double entropy_from_counts(std::span<const std::int64_t> counts) {
  std::int64_t total = 0;
  for (auto n : counts) total += n;
  if (total == 0) throw Error(ErrorKind::kEmptySet, "entropy of an empty set");
  double h = 0.0;
  for (auto n : counts) {
    if (n == 0) continue;
    const double p = static_cast<double>(n) / static_cast<double>(total);
    h -= p * std::log2(p);
  }
  return h;
}

inline double gini_impurity(std::span<const ClassIndex> labels, int n_classes) {
  const auto counts = class_counts(labels, n_classes);
  return gini_from_counts(counts);
}

inline double entropy(std::span<const ClassIndex> labels, int n_classes) {
  const auto counts = class_counts(labels, n_classes);
  return entropy_from_counts(counts);
}

/// Weighted Gini of a partition given per-subset class counts
/// (rows = subsets). Empty subsets contribute zero.
inline double gini_of_partition_counts(const std::vector<std::vector<std::int64_t>>& subset_counts) {
  std::int64_t total = 0;
  for (const auto& row : subset_counts)
    for (auto n : row) total += n;
  if (total == 0) throw Error(ErrorKind::kEmptySet, "partition of an empty set");

  // sum_s (n_s^2 - q_s) / n_s over the common denominator lcm(n_s), so the
  // result rounds once. Falls back to per-subset division on overflow.
  constexpr std::int64_t kExact = std::int64_t{1} << 53;
  std::int64_t lcm = 1;
  bool exact = true;
  for (const auto& row : subset_counts) {
    std::int64_t size = 0;
    for (auto n : row) size += n;
    if (size == 0) continue;
    const std::int64_t next = lcm / std::gcd(lcm, size);
    if (__builtin_mul_overflow(next, size, &lcm) || lcm > kExact) {
      exact = false;
      break;
    }
  }
  if (exact) {
    std::int64_t num = 0;
    for (const auto& row : subset_counts) {
      std::int64_t size = 0, sum_sq = 0;
      for (auto n : row) {
        size += n;
        sum_sq += n * n;
      }
      if (size == 0) continue;
      std::int64_t term = 0;
      if (__builtin_mul_overflow(size * size - sum_sq, lcm / size, &term) || __builtin_add_overflow(num, term, &num)) {
        exact = false;
        break;
      }
    }
    std::int64_t den = 0;
    if (exact && !__builtin_mul_overflow(lcm, total, &den) && num <= kExact && den <= kExact)
      return static_cast<double>(num) / static_cast<double>(den);
  }

  double acc = 0.0;
  for (const auto& row : subset_counts) {
    std::int64_t size = 0;
    std::int64_t sum_sq = 0;
    for (auto n : row) {
      size += n;
      sum_sq += n * n;
    }
    if (size == 0) continue;
    acc += static_cast<double>(size * size - sum_sq) / static_cast<double>(size);
  }
  return acc / static_cast<double>(total);
}

inline double gini_of_partition(const std::vector<std::vector<ClassIndex>>& subsets, int n_classes) {
  std::vector<std::vector<std::int64_t>> counts;
  counts.reserve(subsets.size());
  for (const auto& s : subsets) counts.push_back(class_counts(s, n_classes));
  return gini_of_partition_counts(counts);
}

}  // namespace hqrf
