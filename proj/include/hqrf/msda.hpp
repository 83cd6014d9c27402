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

// Group-Lasso penalised multiclass sparse discriminant analysis.
//
// Solves
//   min_T  sum_c [ 1/2 t_c' S t_c - d_c' t_c ] + lambda * sum_h || T(:, h) ||_2
// over the (n_classes - 1) x n_feat direction matrix T by cyclic blockwise
// coordinate descent. Each block update is the closed-form group
// soft-threshold of the partial-residual target, with the penalty rescaled by
// the block's diagonal variance. Only the active columns of S enter a block
// update, and only one column of S is read per block.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "hqrf/error.hpp"
#include "hqrf/types.hpp"

namespace hqrf {

template <typename Scalar>
struct MsdaProblem {
  Matrix<Scalar> within_cov;  // n_feat x n_feat
  Matrix<Scalar> delta;       // (n_classes - 1) x n_feat, row c-1 = mu_c - mu_0
  Scalar lambda = Scalar(0);
  int max_iters = 1000;
  Scalar tol = Scalar(1e-7);

  Eigen::Index n_feat() const { return within_cov.cols(); }
  Eigen::Index n_directions() const { return delta.rows(); }
};

template <typename Scalar>
struct DiscriminantDirections {
  Matrix<Scalar> theta;  // n_classes x n_feat; row 0 is identically zero
  std::vector<int> active_features;
  int iterations_used = 0;
  bool converged = false;
  std::vector<Scalar> objective_trace;  // objective after each sweep when requested
};

struct MsdaOptions {
  bool record_objective = false;
};

/// tilde * max(0, 1 - threshold / ||tilde||); zero input maps to zero.
template <typename Derived>
Vector<typename Derived::Scalar> group_soft_threshold(const Eigen::MatrixBase<Derived>& tilde,
                                                      typename Derived::Scalar threshold) {
  using Scalar = typename Derived::Scalar;
  const Scalar norm = tilde.norm();
  if (threshold <= Scalar(0)) return tilde;
  if (norm <= threshold || norm == Scalar(0)) return Vector<Scalar>::Zero(tilde.size());
  return tilde * (Scalar(1) - threshold / norm);
}

template <typename Scalar>
void validate(const MsdaProblem<Scalar>& p) {
  const auto n = p.n_feat();
  if (p.within_cov.rows() != n || n < 1)
    throw Error(ErrorKind::kDimensionMismatch, "covariance must be square and nonempty");
  if (p.delta.cols() != n || p.delta.rows() < 1)
    throw Error(ErrorKind::kDimensionMismatch, "delta must be (n_classes-1) x n_feat");
  if (!(p.lambda >= Scalar(0))) throw Error(ErrorKind::kBadConfig, "lambda must be nonnegative");
  if (p.max_iters < 1) throw Error(ErrorKind::kBadConfig, "max_iters must be positive");
  if (!(p.tol > Scalar(0))) throw Error(ErrorKind::kBadConfig, "tol must be positive");
}

/// Covariance actually used by the solver: the input, plus a uniform diagonal
/// jitter of 1e-10 * trace / n_feat when some diagonal entry is below 1e-12.
template <typename Scalar>
Matrix<Scalar> prepared_covariance(const Matrix<Scalar>& cov) {
  Matrix<Scalar> s = cov;
  const Eigen::Index n = s.cols();
  if (s.diagonal().minCoeff() < Scalar(1e-12)) {
    Scalar jitter = Scalar(1e-10) * s.trace() / static_cast<Scalar>(n);
    if (!(jitter > Scalar(0))) jitter = Scalar(1e-10);
    s.diagonal().array() += jitter;
  }
  return s;
}

/// Partial-residual target of block h with every other block held fixed.
/// `theta` is the (n_classes - 1) x n_feat block of directions.
template <typename Scalar>
Vector<Scalar> tilde_theta(const Matrix<Scalar>& cov, const Matrix<Scalar>& delta,
                           const Matrix<Scalar>& theta, Eigen::Index h) {
  const Scalar diag = cov(h, h);
  if (!(diag > Scalar(0)))
    throw Error(ErrorKind::kZeroDiagonal, "covariance diagonal at feature " + std::to_string(h) +
                                              " is not positive");
  Vector<Scalar> residual = delta.col(h) - theta * cov.col(h);
  residual += theta.col(h) * diag;
  return residual / diag;
}

template <typename Scalar>
Vector<Scalar> tilde_theta(const MsdaProblem<Scalar>& problem, const Matrix<Scalar>& theta, Eigen::Index h) {
  return tilde_theta(problem.within_cov, problem.delta, theta, h);
}

/// Objective value for a full n_classes x n_feat direction matrix (row 0 ignored)
/// or a (n_classes - 1) x n_feat block.
template <typename Scalar>
Scalar msda_objective(const MsdaProblem<Scalar>& problem, const Matrix<Scalar>& theta) {
  const Eigen::Index k1 = problem.n_directions();
  if (theta.cols() != problem.n_feat() || (theta.rows() != k1 && theta.rows() != k1 + 1))
    throw Error(ErrorKind::kDimensionMismatch, "theta shape mismatch");
  const auto block = theta.bottomRows(k1);
  Scalar value = Scalar(0);
  for (Eigen::Index c = 0; c < k1; ++c) {
    const auto t = block.row(c);
    value += Scalar(0.5) * t.dot(problem.within_cov * t.transpose()) - problem.delta.row(c).dot(t);
  }
  for (Eigen::Index h = 0; h < block.cols(); ++h) value += problem.lambda * block.col(h).norm();
  return value;
}

template <typename Scalar>
DiscriminantDirections<Scalar> solve_msda(const MsdaProblem<Scalar>& problem, MsdaOptions options = {}) {
  validate(problem);
  const Eigen::Index n = problem.n_feat();
  const Eigen::Index k1 = problem.n_directions();
  const Matrix<Scalar> cov = prepared_covariance(problem.within_cov);
  for (Eigen::Index h = 0; h < n; ++h)
    if (!(cov(h, h) > Scalar(0)))
      throw Error(ErrorKind::kZeroDiagonal, "covariance diagonal at feature " + std::to_string(h) +
                                                " is not positive after jitter");

  MsdaProblem<Scalar> prepared = problem;
  prepared.within_cov = cov;

  Matrix<Scalar> t = Matrix<Scalar>::Zero(k1, n);
  std::vector<char> is_active(static_cast<std::size_t>(n), 0);
  std::vector<Eigen::Index> active;

  DiscriminantDirections<Scalar> out;
  for (int iter = 1; iter <= problem.max_iters; ++iter) {
    Scalar max_change = Scalar(0);
    for (Eigen::Index h = 0; h < n; ++h) {
      const auto column = cov.col(h);
      const Scalar diag = column[h];
      Vector<Scalar> residual = problem.delta.col(h);
      for (Eigen::Index j : active)
        if (j != h) residual.noalias() -= t.col(j) * column[j];
      // Same as group_soft_threshold(residual / diag, lambda / diag), but the
      // zero test compares unscaled quantities so lambda = max ||delta_h|| is exact.
      const Scalar norm = residual.norm();
      Vector<Scalar> updated;
      if (problem.lambda <= Scalar(0))
        updated = residual / diag;
      else if (norm <= problem.lambda)
        updated = Vector<Scalar>::Zero(k1);
      else
        updated = residual * ((Scalar(1) - problem.lambda / norm) / diag);

      max_change = std::max(max_change, (updated - t.col(h)).cwiseAbs().maxCoeff());
      t.col(h) = updated;

      const bool nonzero = updated.squaredNorm() > Scalar(0);
      if (nonzero != static_cast<bool>(is_active[static_cast<std::size_t>(h)])) {
        is_active[static_cast<std::size_t>(h)] = nonzero ? 1 : 0;
        if (nonzero)
          active.insert(std::lower_bound(active.begin(), active.end(), h), h);
        else
          active.erase(std::lower_bound(active.begin(), active.end(), h));
      }
    }
    out.iterations_used = iter;
    if (options.record_objective) out.objective_trace.push_back(msda_objective(prepared, t));
    if (max_change < problem.tol) {
      out.converged = true;
      break;
    }
  }

  out.theta = Matrix<Scalar>::Zero(k1 + 1, n);
  out.theta.bottomRows(k1) = t;
  for (Eigen::Index h = 0; h < n; ++h)
    if (t.col(h).norm() > Scalar(0)) out.active_features.push_back(static_cast<int>(h));
  return out;
}

/// Elementwise soft-threshold: sign(b) * max(|b| - lambda, 0).
template <typename Derived>
Vector<typename Derived::Scalar> lasso_transform(const Eigen::MatrixBase<Derived>& beta,
                                                 typename Derived::Scalar lambda) {
  using Scalar = typename Derived::Scalar;
  Vector<Scalar> out(beta.size());
  for (Eigen::Index i = 0; i < beta.size(); ++i) {
    const Scalar mag = std::max(std::abs(beta[i]) - lambda, Scalar(0));
    out[i] = beta[i] < Scalar(0) ? -mag : mag;
  }
  return out;
}

/// Elementwise ridge shrinkage: b * s / (s + lambda).
template <typename DerivedB, typename DerivedS>
Vector<typename DerivedB::Scalar> ridge_transform(const Eigen::MatrixBase<DerivedB>& beta,
                                                  const Eigen::MatrixBase<DerivedS>& variances,
                                                  typename DerivedB::Scalar lambda) {
  using Scalar = typename DerivedB::Scalar;
  if (beta.size() != variances.size())
    throw Error(ErrorKind::kDimensionMismatch, "ridge transform shape mismatch");
  if (lambda == Scalar(0)) return beta;
  Vector<Scalar> out(beta.size());
  for (Eigen::Index i = 0; i < beta.size(); ++i) out[i] = beta[i] * (variances[i] / (variances[i] + lambda));
  return out;
}

}  // namespace hqrf
