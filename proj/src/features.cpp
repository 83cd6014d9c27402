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

#include "hqrf/features.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>

#include "hqrf/error.hpp"
#include "hqrf/parallel.hpp"

namespace hqrf {

std::vector<std::string> FeatureSchema::names() const {
  std::vector<std::string> out;
  out.reserve(defs.size());
  for (const auto& d : defs) out.push_back(d.name);
  return out;
}

FeatureSchema default_schema(int n_channels) {
  if (n_channels < 1) throw Error(ErrorKind::kBadConfig, "schema needs at least one channel");
  FeatureSchema s;
  s.id = kDefaultSchemaId;
  s.n_channels = n_channels;
  auto ch = [](int c) { return "ch" + std::to_string(c + 1); };
  for (int c = 0; c < n_channels; ++c)
    for (const char* stat : {"median", "cell_mean", "cell_var", "cell_min", "cell_max", "contrast_x", "contrast_y",
                             "contrast_z"})
      s.defs.push_back({ch(c) + "." + stat, {c}, "local", "intra"});
  for (int a = 0; a < n_channels; ++a)
    for (int b = a + 1; b < n_channels; ++b) {
      s.defs.push_back({ch(a) + "/" + ch(b) + ".ratio", {a, b}, "local", "inter"});
      s.defs.push_back({ch(a) + "-" + ch(b) + ".difference", {a, b}, "local", "inter"});
    }
  for (int c = 0; c < n_channels; ++c)
    for (const char* stat : {"nbr_mean", "nbr_var", "nbr_contrast"})
      s.defs.push_back({ch(c) + "." + stat, {c}, "contextual", "intra"});
  for (int a = 0; a < n_channels; ++a)
    for (int b = 0; b < n_channels; ++b)
      if (a != b) s.defs.push_back({ch(a) + ".median-" + ch(b) + ".nbr_mean", {a, b}, "contextual", "inter"});
  return s;
}

FeatureSchema schema_by_id(const std::string& id, int n_channels) {
  if (id != kDefaultSchemaId) throw Error(ErrorKind::kUnknownSchema, "unknown feature schema '" + id + "'");
  return default_schema(n_channels);
}

double median_inplace(std::vector<float>& values) {
  if (values.empty()) throw Error(ErrorKind::kEmptySet, "median of nothing");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return (lower + upper) / 2.0;
}

namespace {

struct LocalSummary {
  std::vector<double> median;                  // per channel
  std::vector<std::array<double, 27>> cells;  // per channel
};

void gather_box(const LabeledVolume& v, int c, const Int3& o, int side, std::vector<float>& buf) {
  buf.clear();
  const auto& grid = v.channels[static_cast<std::size_t>(c)];
  for (int k = 0; k < side; ++k)
    for (int j = 0; j < side; ++j) {
      const auto row = static_cast<std::size_t>(v.dims.index(o[0], o[1] + j, o[2] + k));
      buf.insert(buf.end(), grid.begin() + static_cast<std::ptrdiff_t>(row),
                 grid.begin() + static_cast<std::ptrdiff_t>(row) + side);
    }
}

LocalSummary summarize(const LabeledVolume& v, int layer, const Int3& origin, std::vector<float>& buf) {
  const int n_chan = v.n_channels();
  LocalSummary s;
  s.median.resize(static_cast<std::size_t>(n_chan));
  s.cells.resize(static_cast<std::size_t>(n_chan));
  const auto cells = patch_cells(layer, origin);
  for (int c = 0; c < n_chan; ++c) {
    gather_box(v, c, origin, patch_side(layer), buf);
    s.median[static_cast<std::size_t>(c)] = median_inplace(buf);
    for (std::size_t n = 0; n < 27; ++n) {
      gather_box(v, c, cells[n].origin, cells[n].side, buf);
      s.cells[static_cast<std::size_t>(c)][n] = median_inplace(buf);
    }
  }
  return s;
}

double median_of(std::vector<double> v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  return (*std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)) + upper) / 2.0;
}

double plane_median(const std::array<double, 27>& cells, int axis, int plane) {
  std::vector<double> vals;
  vals.reserve(9);
  for (int k = 0; k < 3; ++k)
    for (int j = 0; j < 3; ++j)
      for (int i = 0; i < 3; ++i) {
        const int pos = axis == 0 ? i : (axis == 1 ? j : k);
        if (pos == plane) vals.push_back(cells[static_cast<std::size_t>(i + 3 * j + 9 * k)]);
      }
  return median_of(std::move(vals));
}

/// nbr_medians[c] lists the neighbour medians of channel c (may be empty).
VectorXd assemble(const LocalSummary& s, const std::vector<std::vector<double>>& nbr_medians) {
  const int n_chan = static_cast<int>(s.median.size());
  std::vector<double> f;
  f.reserve(static_cast<std::size_t>(default_schema(n_chan).n_tot()));
  for (int c = 0; c < n_chan; ++c) {
    const auto& cells = s.cells[static_cast<std::size_t>(c)];
    double mean = 0.0;
    for (double x : cells) mean += x;
    mean /= 27.0;
    double var = 0.0;
    for (double x : cells) var += (x - mean) * (x - mean);
    var /= 27.0;
    f.push_back(s.median[static_cast<std::size_t>(c)]);
    f.push_back(mean);
    f.push_back(var);
    f.push_back(*std::min_element(cells.begin(), cells.end()));
    f.push_back(*std::max_element(cells.begin(), cells.end()));
    for (int axis = 0; axis < 3; ++axis) f.push_back(plane_median(cells, axis, 2) - plane_median(cells, axis, 0));
  }
  for (int a = 0; a < n_chan; ++a)
    for (int b = a + 1; b < n_chan; ++b) {
      const double ma = s.median[static_cast<std::size_t>(a)], mb = s.median[static_cast<std::size_t>(b)];
      f.push_back(ma / (ma + mb + kRatioEpsilon));
      f.push_back(ma - mb);
    }
  std::vector<double> nbr_mean(static_cast<std::size_t>(n_chan));
  for (int c = 0; c < n_chan; ++c) {
    const auto& nb = nbr_medians[static_cast<std::size_t>(c)];
    const double own = s.median[static_cast<std::size_t>(c)];
    double mean = own, var = 0.0;
    if (!nb.empty()) {
      mean = 0.0;
      for (double x : nb) mean += x;
      mean /= static_cast<double>(nb.size());
      for (double x : nb) var += (x - mean) * (x - mean);
      var /= static_cast<double>(nb.size());
    }
    nbr_mean[static_cast<std::size_t>(c)] = mean;
    f.push_back(mean);
    f.push_back(var);
    f.push_back(own - mean);
  }
  for (int a = 0; a < n_chan; ++a)
    for (int b = 0; b < n_chan; ++b)
      if (a != b) f.push_back(s.median[static_cast<std::size_t>(a)] - nbr_mean[static_cast<std::size_t>(b)]);
  return Eigen::Map<const VectorXd>(f.data(), static_cast<Eigen::Index>(f.size()));
}

}  // namespace

MatrixXd layer_features(const LabeledVolume& volume, const Pyramid& pyramid, int layer, int threads) {
  if (layer < 1) throw Error(ErrorKind::kNoCells, "layer features need r >= 1; use voxel_features");
  if (!(volume.dims == pyramid.dims())) throw Error(ErrorKind::kDimensionMismatch, "volume does not match pyramid");
  const auto& g = pyramid.layer(layer);
  const std::int64_t n = g.size();
  const int n_chan = volume.n_channels();
  std::vector<LocalSummary> summaries(static_cast<std::size_t>(n));
  parallel_for(n, threads, [&](std::int64_t id) {
    thread_local std::vector<float> buf;
    summaries[static_cast<std::size_t>(id)] = summarize(volume, layer, g.origin(id), buf);
  });
  MatrixXd out(n, default_schema(n_chan).n_tot());
  parallel_for(n, threads, [&](std::int64_t id) {
    std::vector<std::vector<double>> nbr(static_cast<std::size_t>(n_chan));
    for (PatchId q : pyramid.neighbors(layer, id))
      for (int c = 0; c < n_chan; ++c)
        nbr[static_cast<std::size_t>(c)].push_back(summaries[static_cast<std::size_t>(q)].median[static_cast<std::size_t>(c)]);
    out.row(id) = assemble(summaries[static_cast<std::size_t>(id)], nbr).transpose();
  });
  return out;
}

VectorXd extract_features(const LabeledVolume& volume, const Pyramid& pyramid, int layer, PatchId id) {
  if (layer == 0) {
    const Int3 o = pyramid.layer(0).origin(id);
    return voxel_features(volume, o[0], o[1], o[2]);
  }
  const auto& g = pyramid.layer(layer);
  std::vector<float> buf;
  const LocalSummary own = summarize(volume, layer, g.origin(id), buf);
  std::vector<std::vector<double>> nbr(static_cast<std::size_t>(volume.n_channels()));
  for (PatchId q : pyramid.neighbors(layer, id)) {
    const LocalSummary s = summarize(volume, layer, g.origin(q), buf);
    for (std::size_t c = 0; c < nbr.size(); ++c) nbr[c].push_back(s.median[c]);
  }
  return assemble(own, nbr);
}

VectorXd voxel_features(const LabeledVolume& volume, int i, int j, int k) {
  VectorXd f(volume.n_channels());
  for (int c = 0; c < volume.n_channels(); ++c) f[c] = volume.value(c, i, j, k);
  return f;
}

// ---------------------------------------------------------------------------

std::pair<int, int> squared_factors(int n, int k) {
  if (k < 0 || k >= n_squared(n)) throw Error(ErrorKind::kDimensionMismatch, "squared-feature index out of range");
  if (k < n) return {k, -1};
  int rem = k - n;
  for (int i = 0; i < n; ++i) {
    const int row = n - 1 - i;
    if (rem < row) return {i, i + 1 + rem};
    rem -= row;
  }
  return {rem, rem};
}

int squared_index(int n, int i, int j) {
  if (i < 0 || i >= n || j >= n) throw Error(ErrorKind::kDimensionMismatch, "factor index out of range");
  if (j < 0) return i;
  if (i == j) return n + n * (n - 1) / 2 + i;
  if (i > j) std::swap(i, j);
  return n + i * n - i * (i + 1) / 2 + (j - i - 1);
}

VectorXd square_features(const VectorXd& selected) {
  const int n = static_cast<int>(selected.size());
  if (n < 1) throw Error(ErrorKind::kDimensionMismatch, "nothing to square");
  VectorXd out(n_squared(n));
  out.head(n) = selected;
  int k = n;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) out[k++] = selected[i] * selected[j];
  out.tail(n) = selected.array().square().matrix();
  return out;
}

MatrixXd square_rows(const MatrixXd& rows) {
  MatrixXd out(rows.rows(), n_squared(static_cast<int>(rows.cols())));
  for (Eigen::Index r = 0; r < rows.rows(); ++r) out.row(r) = square_features(rows.row(r).transpose()).transpose();
  return out;
}

double squared_feature_value(const VectorXd& inputs, int k) {
  const auto [i, j] = squared_factors(static_cast<int>(inputs.size()), k);
  return j < 0 ? inputs[i] : inputs[i] * inputs[j];
}

int global_squared_index(int n_tot, const std::vector<int>& subset, int k) {
  const auto [i, j] = squared_factors(static_cast<int>(subset.size()), k);
  const int a = subset.at(static_cast<std::size_t>(i));
  return squared_index(n_tot, a, j < 0 ? -1 : subset.at(static_cast<std::size_t>(j)));
}

std::string squared_feature_name(const std::vector<std::string>& raw_names, int k) {
  const auto [i, j] = squared_factors(static_cast<int>(raw_names.size()), k);
  const auto& a = raw_names[static_cast<std::size_t>(i)];
  if (j < 0) return a;
  if (i == j) return a + "^2";
  return a + "*" + raw_names[static_cast<std::size_t>(j)];
}

// ---------------------------------------------------------------------------

int n_selected(int n_tot) {
  if (n_tot < 1) throw Error(ErrorKind::kBadConfig, "n_tot must be positive");
  int s = static_cast<int>(std::sqrt(static_cast<double>(n_tot)));
  while (s * s > n_tot) --s;
  while ((s + 1) * (s + 1) <= n_tot) ++s;
  return s;
}

std::vector<std::vector<int>> tree_feature_sets(int n_tot, int n_trees, int n_sel, std::uint64_t seed) {
  if (n_trees < 1 || n_sel < 1) throw Error(ErrorKind::kBadConfig, "tree and subset counts must be positive");
  if (static_cast<std::int64_t>(n_trees) * n_sel > n_tot)
    throw Error(ErrorKind::kTooManyTrees, std::to_string(n_trees) + " disjoint subsets of " + std::to_string(n_sel) +
                                              " exceed " + std::to_string(n_tot) + " features");
  std::vector<int> perm(static_cast<std::size_t>(n_tot));
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(mix_seed(seed, 0x5e7));
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::vector<int>> sets(static_cast<std::size_t>(n_trees));
  for (int w = 0; w < n_trees; ++w) {
    auto first = perm.begin() + static_cast<std::ptrdiff_t>(w) * n_sel;
    sets[static_cast<std::size_t>(w)].assign(first, first + n_sel);
    std::sort(sets[static_cast<std::size_t>(w)].begin(), sets[static_cast<std::size_t>(w)].end());
  }
  return sets;
}

std::vector<int> select_tree_features(int n_tot, int w, std::uint64_t seed) {
  const int n_sel = n_selected(n_tot);
  if (w < 1 || w > n_sel) throw Error(ErrorKind::kTooManyTrees, "tree index outside 1..n_weak");
  return tree_feature_sets(n_tot, n_sel, n_sel, seed)[static_cast<std::size_t>(w - 1)];
}

}  // namespace hqrf
