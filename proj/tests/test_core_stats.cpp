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

#include <doctest.h>

#include "generators.hpp"
#include "hqrf/core_stats.hpp"
#include "oracles.hpp"

using namespace hqrf;

namespace {

LabeledSampleSet<double> set_1d(std::vector<double> values, std::vector<ClassIndex> labels, int k) {
  LabeledSampleSet<double> s;
  s.features.resize(static_cast<Eigen::Index>(values.size()), 1);
  for (std::size_t i = 0; i < values.size(); ++i) s.features(static_cast<Eigen::Index>(i), 0) = values[i];
  s.labels = std::move(labels);
  s.n_classes = k;
  return s;
}

}  // namespace

TEST_CASE("class means and priors") {
  SUBCASE("one sample per class") {
    const auto m = class_means_priors(set_1d({0, 1, 2}, {0, 1, 2}, 3));
    for (int c = 0; c < 3; ++c) {
      CHECK(m.class_means(c, 0) == c);
      CHECK(m.priors[c] == doctest::Approx(1.0 / 3));
    }
  }
  SUBCASE("two classes {0,2} vs {4}") {
    const auto m = class_means_priors(set_1d({0, 2, 4}, {0, 0, 1}, 2));
    CHECK(m.class_means(0, 0) == 1.0);
    CHECK(m.class_means(1, 0) == 4.0);
    CHECK(m.priors[0] == doctest::Approx(2.0 / 3));
    CHECK(m.priors[1] == doctest::Approx(1.0 / 3));
    CHECK(m.overall_mean[0] == doctest::Approx(2.0));
  }
  SUBCASE("constant features") {
    const auto m = class_means_priors(set_1d({7, 7, 7, 7}, {0, 1, 1, 0}, 2));
    CHECK(m.class_means(0, 0) == 7.0);
    CHECK(m.class_means(1, 0) == 7.0);
    CHECK(m.overall_mean[0] == doctest::Approx(7.0));
  }
  SUBCASE("empty class") {
    CHECK_THROWS_AS(class_means_priors(set_1d({1, 2}, {0, 0}, 2)), Error);
  }
}

TEST_CASE("within-class covariance") {
  SUBCASE("internally constant classes") {
    auto s = set_1d({1, 1, 5, 5}, {0, 0, 1, 1}, 2);
    const auto m = class_means_priors(s);
    CHECK(within_class_covariance(s, m.class_means).first(0, 0) == 0.0);
  }
  SUBCASE("{0,2} and {10,12}") {
    auto s = set_1d({0, 2, 10, 12}, {0, 0, 1, 1}, 2);
    const auto [cov, dof] = within_class_covariance(s, class_means_priors(s).class_means);
    CHECK(dof == 2);
    CHECK(cov(0, 0) == doctest::Approx(2.0));
  }
  SUBCASE("duplicated samples follow the dof ratio") {
    testing::Gen g(3);
    LabeledSampleSet<double> s;
    s.features = g.normal_matrix(12, 3);
    s.labels = g.labels(12, 3);
    s.n_classes = 3;
    const auto [cov, dof] = within_class_covariance(s, class_means_priors(s).class_means);
    LabeledSampleSet<double> d = s;
    d.features.resize(24, 3);
    d.features << s.features, s.features;
    d.labels.insert(d.labels.end(), s.labels.begin(), s.labels.end());
    const auto [cov2, dof2] = within_class_covariance(d, class_means_priors(d).class_means);
    CHECK(dof2 == 2 * 12 - 3);
    CHECK((cov2 * static_cast<double>(dof2) - cov * 2.0 * static_cast<double>(dof)).norm() < 1e-10);
  }
  SUBCASE("too few samples") {
    auto s = set_1d({1, 2}, {0, 1}, 2);
    CHECK_THROWS_AS(within_class_covariance(s, class_means_priors(s).class_means), Error);
  }
}

TEST_CASE("between-class and class covariance") {
  Vector<double> pri(2);
  pri << 0.5, 0.5;
  Matrix<double> means(2, 1);
  means << 0, 2;
  Vector<double> mu(1);
  mu << 1;
  CHECK(between_class_covariance(means, pri, mu)(0, 0) == doctest::Approx(1.0));

  Matrix<double> equal(2, 2);
  equal << 1, 2, 1, 2;
  Vector<double> mu2(2);
  mu2 << 1, 2;
  CHECK(between_class_covariance(equal, pri, mu2).norm() == 0.0);

  CHECK(class_covariance(set_1d({0, 2, 9}, {0, 0, 1}, 2), 0)(0, 0) == doctest::Approx(1.0));
  CHECK(class_covariance(set_1d({0, 2, 9}, {0, 0, 1}, 2), 1)(0, 0) == 0.0);
  CHECK(class_covariance(set_1d({0, 2, 0, 2, 0, 2}, {0, 0, 0, 0, 0, 0}, 1), 0)(0, 0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(class_covariance(set_1d({0, 2}, {0, 0}, 2), 1), Error);
}

TEST_CASE("impurities on hand fixtures") {
  const std::vector<ClassIndex> pure{1, 1, 1};
  CHECK(gini_impurity(pure, 3) == 0.0);
  CHECK(entropy(pure, 3) == 0.0);
  const std::vector<ClassIndex> half{0, 1, 0, 1};
  CHECK(gini_impurity(half, 2) == 0.5);
  CHECK(entropy(half, 2) == 1.0);
  const std::vector<ClassIndex> three_one{0, 0, 0, 1};
  CHECK(gini_impurity(three_one, 2) == 0.375);
  CHECK(entropy(three_one, 2) == doctest::Approx(0.811278).epsilon(1e-6));
  CHECK(gini_of_partition({{0, 0, 0, 1}, {1, 1, 1, 1}}, 2) == 0.1875);
  CHECK(gini_of_partition({{0, 1}, {}}, 2) == 0.5);
  CHECK(gini_of_partition({{0, 0}, {1}}, 2) == 0.0);
  CHECK_THROWS_AS(gini_impurity(std::vector<ClassIndex>{}, 2), Error);
  CHECK_THROWS_AS(gini_of_partition({{}, {}}, 2), Error);
}

TEST_CASE("property: covariance matches brute-force pair accumulation and is translation invariant") {
  testing::Gen g(11);
  for (int trial = 0; trial < 40; ++trial) {
    const int k = g.uniform_int(1, 4), d = g.uniform_int(1, 5), n = g.uniform_int(k + 1, 40);
    LabeledSampleSet<double> s;
    s.features = g.normal_matrix(n, d) * 3.0;
    s.labels = g.labels(n, k);
    s.n_classes = k;
    const auto stats = compute_class_stats(s);

    Eigen::MatrixXd brute = Eigen::MatrixXd::Zero(d, d);
    for (int c = 0; c < k; ++c) {
      Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
      int count = 0;
      for (int i = 0; i < n; ++i)
        if (s.labels[static_cast<std::size_t>(i)] == c) mean += s.features.row(i).transpose(), ++count;
      mean /= count;
      for (int i = 0; i < n; ++i)
        if (s.labels[static_cast<std::size_t>(i)] == c) {
          const Eigen::VectorXd dev = s.features.row(i).transpose() - mean;
          brute += dev * dev.transpose();
        }
    }
    brute /= static_cast<double>(n - k);
    CHECK((stats.within_cov - brute).norm() <= 1e-12 * std::max(1.0, brute.norm()));
    CHECK(stats.within_cov.isApprox(stats.within_cov.transpose(), 0.0));
    CHECK(stats.priors.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(stats.within_cov).eigenvalues().minCoeff() > -1e-10);

    LabeledSampleSet<double> shifted = s;
    const Eigen::RowVectorXd shift = g.normal_matrix(1, d) * 100.0;
    shifted.features.rowwise() += shift;
    const auto st2 = compute_class_stats(shifted);
    CHECK((st2.within_cov - stats.within_cov).norm() <= 1e-12 * std::max(1.0, stats.within_cov.norm()) * 1e3);
    CHECK((st2.between_cov - stats.between_cov).norm() <= 1e-9 * std::max(1.0, stats.between_cov.norm()));
  }
}

TEST_CASE("property: impurity bounds on random label sets") {
  testing::Gen g(5);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = g.uniform_int(1, 6), n = g.uniform_int(1, 60);
    std::vector<ClassIndex> labels(static_cast<std::size_t>(n));
    for (auto& l : labels) l = g.uniform_int(0, k - 1);
    const double gi = gini_impurity(labels, k), h = entropy(labels, k);
    CHECK(gi >= 0.0);
    CHECK(gi <= (k - 1.0) / k + 1e-15);
    CHECK(h >= 0.0);
    CHECK(h <= std::log2(static_cast<double>(k)) + 1e-12);
  }
}

TEST_CASE("exhaustive: impurities agree with exact counting on small multisets") {
  for (int k = 1; k <= 3; ++k)
    for (int n = 1; n <= 8; ++n) {
      std::vector<int> counts(static_cast<std::size_t>(k), 0);
      // every count vector of size n over k classes
      std::function<void(int, int)> rec = [&](int c, int left) {
        if (c == k - 1) {
          counts[static_cast<std::size_t>(c)] = left;
          std::vector<std::int64_t> cnt(counts.begin(), counts.end());
          CHECK(gini_from_counts(cnt) == oracle::gini_exact(cnt).value());
          CHECK(std::abs(entropy_from_counts(cnt) - static_cast<double>(oracle::entropy_reference(cnt))) < 1e-14);
          return;
        }
        for (int x = 0; x <= left; ++x) {
          counts[static_cast<std::size_t>(c)] = x;
          rec(c + 1, left - x);
        }
      };
      rec(0, n);
    }
}
