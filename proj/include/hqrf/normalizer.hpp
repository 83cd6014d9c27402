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

#include <algorithm>
#include <cmath>

#include "hqrf/error.hpp"
#include "hqrf/types.hpp"

namespace hqrf {

inline constexpr double kMinStd = 1e-12;

/// Per-column standardisation statistics (population standard deviation).
template <typename Scalar>
struct Normalizer {
  Vector<Scalar> means;
  Vector<Scalar> stds;

  Eigen::Index size() const { return means.size(); }

  template <typename Derived>
  Vector<Scalar> apply(const Eigen::MatrixBase<Derived>& v) const {
    if (v.size() != means.size()) throw Error(ErrorKind::kDimensionMismatch, "normalizer width mismatch");
    return ((v.derived().template cast<Scalar>() - means).array() / stds.array()).matrix();
  }

  Matrix<Scalar> apply_rows(const Matrix<Scalar>& rows) const {
    if (rows.cols() != means.size()) throw Error(ErrorKind::kDimensionMismatch, "normalizer width mismatch");
    Matrix<Scalar> out = rows;
    out.rowwise() -= means.transpose();
    out.array().rowwise() /= stds.transpose().array();
    return out;
  }
};

template <typename Scalar>
Normalizer<Scalar> fit_normalizer(const Matrix<Scalar>& rows) {
  if (rows.rows() < 2) throw Error(ErrorKind::kInsufficientSamples, "normalizer needs at least two vectors");
  Normalizer<Scalar> n;
  n.means = rows.colwise().mean().transpose();
  n.stds.resize(rows.cols());
  for (Eigen::Index j = 0; j < rows.cols(); ++j) {
    const Scalar var = (rows.col(j).array() - n.means[j]).square().mean();
    n.stds[j] = std::max(std::sqrt(var), static_cast<Scalar>(kMinStd));
  }
  return n;
}

template <typename Scalar>
Vector<Scalar> apply_normalizer(const Vector<Scalar>& v, const Vector<Scalar>& means, const Vector<Scalar>& stds) {
  return Normalizer<Scalar>{means, stds}.apply(v);
}

}  // namespace hqrf
