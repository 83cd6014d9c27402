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

#include "hqrf/forest.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <mutex>
#include <set>

#include "hqrf/core_stats.hpp"
#include "hqrf/error.hpp"
#include "hqrf/parallel.hpp"
#include "hqrf/smote.hpp"

namespace hqrf {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

void Hyperparams::validate() const {
  if (n_layers < 1 || n_layers > 12) throw Error(ErrorKind::kBadConfig, "n_layers must lie in 1..12");
  if (d1 < 1) throw Error(ErrorKind::kBadConfig, "d1 must be at least 1");
  if (!(g_tree > 0.0 && g_tree < 1.0)) throw Error(ErrorKind::kBadConfig, "g_tree must lie in (0, 1)");
  if (static_cast<int>(lambdas.size()) != n_layers)
    throw Error(ErrorKind::kBadConfig, "need one lambda per layer (" + std::to_string(n_layers) + ")");
  for (double l : lambdas)
    if (!(l >= 0.0) || !std::isfinite(l)) throw Error(ErrorKind::kBadConfig, "lambdas must be finite and nonnegative");
  if (n_grid < 2) throw Error(ErrorKind::kBadConfig, "n_grid must be at least 2");
  if (max_iters < 1 || !(tol > 0.0)) throw Error(ErrorKind::kBadConfig, "solver limits must be positive");
}

Normalizer<double> fit_layer_normalizer(const MatrixXd& rows) {
  if (rows.rows() >= 2) return fit_normalizer(rows);
  Normalizer<double> n;
  n.means = rows.rows() == 1 ? VectorXd(rows.row(0).transpose()) : VectorXd::Zero(rows.cols());
  n.stds = VectorXd::Ones(rows.cols());
  return n;
}

PreparedVolume prepare_volume(const LabeledVolume& volume, int n_layers, int n_classes, int threads,
                              PhaseTimes* times) {
  volume.validate();
  auto t0 = Clock::now();
  PreparedVolume p{&volume, Pyramid(volume.dims, n_layers), {}, {}, {}, {}};
  if (volume.has_labels()) {
    const LabelTables tables(volume, n_classes);
    p.ref_labels.resize(static_cast<std::size_t>(n_layers + 1));
    p.heterogeneity.resize(static_cast<std::size_t>(n_layers + 1));
    for (int r = 1; r <= n_layers; ++r) {
      const auto& g = p.pyramid.layer(r);
      auto& labels = p.ref_labels[static_cast<std::size_t>(r)];
      auto& het = p.heterogeneity[static_cast<std::size_t>(r)];
      labels.resize(static_cast<std::size_t>(g.size()));
      het.resize(static_cast<std::size_t>(g.size()));
      if (r == 1) p.voxel_hist.resize(static_cast<std::size_t>(g.size()));
      for (PatchId id = 0; id < g.size(); ++id) {
        auto stats = label_stats_from_histogram(tables.histogram(g.origin(id), g.side));
        labels[static_cast<std::size_t>(id)] = stats.ref_label;
        het[static_cast<std::size_t>(id)] = stats.heterogeneity;
        if (r == 1) p.voxel_hist[static_cast<std::size_t>(id)] = std::move(stats.histogram);
      }
    }
  }
  if (times) times->pyramid += seconds_since(t0);

  t0 = Clock::now();
  p.features.resize(static_cast<std::size_t>(n_layers + 1));
  for (int r = 1; r <= n_layers; ++r) p.features[static_cast<std::size_t>(r)] = layer_features(volume, p.pyramid, r, threads);
  if (times) times->features += seconds_since(t0);
  return p;
}

// ---------------------------------------------------------------------------
// Growing.

namespace {

struct SampleRef {
  int volume;
  PatchId id;
};

class TreeGrower {
 public:
  TreeGrower(const std::vector<PreparedVolume>& data, const std::vector<std::vector<MatrixXd>>& normalized, int w,
             int n_weak, int n_classes, const Hyperparams& hyper, Tree& tree)
      : data_(data), normalized_(normalized), w_(w), n_weak_(n_weak), k_(n_classes), hyper_(hyper), tree_(tree) {}

  int grow(int r, int depth, const std::vector<SampleRef>& samples, bool after_layer1_decision) {
    const int idx = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    {
      auto& node = tree_.nodes.back();
      node.layer = r;
      node.depth = depth;
      node.n_samples = static_cast<std::int64_t>(samples.size());
    }

    std::vector<ClassIndex> labels;
    std::vector<double> het;
    labels.reserve(samples.size());
    het.reserve(samples.size());
    for (const auto& s : samples) {
      labels.push_back(data_[static_cast<std::size_t>(s.volume)].ref_labels[static_cast<std::size_t>(r)][static_cast<std::size_t>(s.id)]);
      het.push_back(data_[static_cast<std::size_t>(s.volume)].heterogeneity[static_cast<std::size_t>(r)][static_cast<std::size_t>(s.id)]);
    }
    const auto counts = class_counts(labels, k_);

    if (r == 1 && ((after_layer1_decision && gini_from_counts(counts) < hyper_.g_tree) || depth > hyper_.d_tree())) {
      make_leaf(idx, samples);
      return idx;
    }

    std::vector<ClassIndex> present;
    for (int c = 0; c < k_; ++c)
      if (counts[static_cast<std::size_t>(c)] > 0) present.push_back(c);

    {
      auto& node = tree_.nodes[static_cast<std::size_t>(idx)];
      node.classes = present;
      node.probs.resize(static_cast<std::size_t>(k_));
      for (int c = 0; c < k_; ++c)
        node.probs[static_cast<std::size_t>(c)] = static_cast<double>(counts[static_cast<std::size_t>(c)]) / static_cast<double>(samples.size());
      double h = 0.0;
      for (double x : het) h += x;
      node.difficulty = h / static_cast<double>(samples.size());
      node.children.assign(static_cast<std::size_t>(k_), -1);
    }

    std::vector<ClassIndex> estimated(samples.size(), present.front());
    if (present.size() == 1) {
      auto& node = tree_.nodes[static_cast<std::size_t>(idx)];
      node.accuracy = 1.0;
      node.n_balanced = node.n_samples;
      node.partition = {{node.n_samples}};
    } else {
      fit_node(idx, r, samples, labels, het, present, estimated);
    }

    std::vector<std::vector<SampleRef>> branches(static_cast<std::size_t>(k_));
    for (std::size_t i = 0; i < samples.size(); ++i) {
      auto& b = branches[static_cast<std::size_t>(estimated[i])];
      if (r >= 2) {
        for (PatchId child : data_[static_cast<std::size_t>(samples[i].volume)].pyramid.children(r, samples[i].id))
          b.push_back({samples[i].volume, child});
      } else {
        b.push_back(samples[i]);
      }
    }
    const int next_r = r >= 2 ? r - 1 : 1;
    for (int c = 0; c < k_; ++c) {
      const auto& b = branches[static_cast<std::size_t>(c)];
      if (b.empty()) continue;
      const int child = grow(next_r, depth + 1, b, r == 1);
      tree_.nodes[static_cast<std::size_t>(idx)].children[static_cast<std::size_t>(c)] = child;
    }
    return idx;
  }

  double smote_seconds() const { return smote_seconds_; }

 private:
  void make_leaf(int idx, const std::vector<SampleRef>& samples) {
    std::vector<std::int64_t> voxels(static_cast<std::size_t>(k_), 0);
    for (const auto& s : samples) {
      const auto& h = data_[static_cast<std::size_t>(s.volume)].voxel_hist[static_cast<std::size_t>(s.id)];
      for (int c = 0; c < k_; ++c) voxels[static_cast<std::size_t>(c)] += h[static_cast<std::size_t>(c)];
    }
    std::int64_t total = 0;
    for (auto n : voxels) total += n;
    auto& node = tree_.nodes[static_cast<std::size_t>(idx)];
    node.leaf = true;
    node.probs.resize(static_cast<std::size_t>(k_));
    for (int c = 0; c < k_; ++c) {
      node.probs[static_cast<std::size_t>(c)] = static_cast<double>(voxels[static_cast<std::size_t>(c)]) / static_cast<double>(total);
      if (voxels[static_cast<std::size_t>(c)] > 0) node.classes.push_back(c);
    }
    node.accuracy = 1.0 - gini_from_counts(voxels);
    node.difficulty = 0.0;
  }

  void fit_node(int idx, int r, const std::vector<SampleRef>& samples, const std::vector<ClassIndex>& labels,
                const std::vector<double>& het, const std::vector<ClassIndex>& present,
                std::vector<ClassIndex>& estimated) {
    const int kp = static_cast<int>(present.size());
    std::vector<ClassIndex> local_of(static_cast<std::size_t>(k_), -1);
    for (int l = 0; l < kp; ++l) local_of[static_cast<std::size_t>(present[static_cast<std::size_t>(l)])] = l;

    const auto n_sel = static_cast<Eigen::Index>(tree_.features.size());
    MatrixXd f(static_cast<Eigen::Index>(samples.size()), n_sel);
    std::vector<ClassIndex> local(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const auto& rows = normalized_[static_cast<std::size_t>(samples[i].volume)][static_cast<std::size_t>(r)];
      for (Eigen::Index j = 0; j < n_sel; ++j) f(static_cast<Eigen::Index>(i), j) = rows(samples[i].id, tree_.features[static_cast<std::size_t>(j)]);
      local[i] = local_of[static_cast<std::size_t>(labels[i])];
    }

    const auto t0 = Clock::now();
    const auto plan = plan_balancing(local, kp);
    const auto balanced = smote_balance(f, local, het, plan, w_, n_weak_, mix_seed(tree_.seed, static_cast<std::uint64_t>(idx)));
    smote_seconds_ += seconds_since(t0);

    DiscriminantOptions opt;
    opt.lambda = hyper_.lambda(r);
    opt.max_iters = hyper_.max_iters;
    opt.tol = hyper_.tol;
    opt.n_grid = hyper_.n_grid;
    auto fit = fit_discriminant<double>(square_rows(balanced.features), balanced.labels, kp, opt);

    auto& node = tree_.nodes[static_cast<std::size_t>(idx)];
    node.n_balanced = balanced.size();
    node.accuracy = std::clamp(1.0 - fit.min_gini, 0.0, 1.0);
    node.converged = fit.converged;
    node.degenerate_scores = fit.degenerate_scores;
    node.partition.assign(static_cast<std::size_t>(kp), std::vector<std::int64_t>(static_cast<std::size_t>(kp), 0));
    for (std::size_t i = 0; i < balanced.labels.size(); ++i)
      ++node.partition[static_cast<std::size_t>(fit.assignments[i])][static_cast<std::size_t>(balanced.labels[i])];
    for (std::size_t i = 0; i < samples.size(); ++i)
      estimated[i] = present[static_cast<std::size_t>(fit.assignments[i])];
    node.disc = std::move(fit.disc);
  }

  const std::vector<PreparedVolume>& data_;
  const std::vector<std::vector<MatrixXd>>& normalized_;
  int w_;
  int n_weak_;
  int k_;
  const Hyperparams& hyper_;
  Tree& tree_;
  double smote_seconds_ = 0.0;
};

}  // namespace

Tree grow_tree(const std::vector<PreparedVolume>& data, const std::vector<std::vector<MatrixXd>>& normalized, int w,
               int n_weak, const std::vector<int>& features, int n_classes, const Hyperparams& hyper,
               double* smote_seconds) {
  hyper.validate();
  Tree tree;
  tree.index = w;
  tree.seed = mix_seed(hyper.seed, static_cast<std::uint64_t>(w));
  tree.features = features;
  std::vector<SampleRef> roots;
  for (std::size_t v = 0; v < data.size(); ++v) {
    if (data[v].ref_labels.empty()) throw Error(ErrorKind::kDimensionMismatch, "training volume carries no labels");
    const auto& g = data[v].pyramid.layer(hyper.n_layers);
    for (PatchId id = 0; id < g.size(); ++id) roots.push_back({static_cast<int>(v), id});
  }
  if (roots.empty()) throw Error(ErrorKind::kEmptySet, "no coarsest-layer training samples");
  TreeGrower grower(data, normalized, w, n_weak, n_classes, hyper, tree);
  grower.grow(hyper.n_layers, 1, roots, false);
  if (smote_seconds) *smote_seconds = grower.smote_seconds();
  return tree;
}

Model train_forest(const std::vector<PreparedVolume>& data, int n_classes, const Hyperparams& hyper, int threads,
                   TrainReport* report) {
  hyper.validate();
  if (data.empty()) throw Error(ErrorKind::kEmptySet, "no training volumes");
  if (n_classes < 1) throw Error(ErrorKind::kBadConfig, "n_classes must be positive");
  Model model;
  model.schema = default_schema(data.front().volume->n_channels());
  model.n_classes = n_classes;
  model.hyper = hyper;
  for (int c = 0; c < n_classes; ++c) model.class_names.push_back("class" + std::to_string(c + 1));

  const int n_tot = model.schema.n_tot();
  const int n_sel = n_selected(n_tot);
  const int n_weak = n_sel;
  const auto sets = tree_feature_sets(n_tot, n_weak, n_sel, hyper.seed);

  auto t0 = Clock::now();
  std::vector<std::vector<MatrixXd>> normalized(data.size(), std::vector<MatrixXd>(static_cast<std::size_t>(hyper.n_layers + 1)));
  for (int r = 1; r <= hyper.n_layers; ++r) {
    Eigen::Index rows = 0;
    for (const auto& d : data) {
      if (d.volume->n_channels() != model.schema.n_channels)
        throw Error(ErrorKind::kDimensionMismatch, "training volumes disagree in channel count");
      if (d.pyramid.n_layers() != hyper.n_layers)
        throw Error(ErrorKind::kDimensionMismatch, "prepared pyramid depth differs from n_layers");
      rows += d.features[static_cast<std::size_t>(r)].rows();
    }
    MatrixXd stacked(rows, n_tot);
    Eigen::Index at = 0;
    for (const auto& d : data) {
      const auto& m = d.features[static_cast<std::size_t>(r)];
      stacked.middleRows(at, m.rows()) = m;
      at += m.rows();
    }
    model.layer_norms.push_back(fit_layer_normalizer(stacked));
    for (std::size_t v = 0; v < data.size(); ++v)
      normalized[v][static_cast<std::size_t>(r)] = model.layer_norms.back().apply_rows(data[v].features[static_cast<std::size_t>(r)]);
  }
  const double t_norm = seconds_since(t0);

  std::vector<std::optional<Tree>> grown(static_cast<std::size_t>(n_weak));
  std::vector<std::string> errors(static_cast<std::size_t>(n_weak));
  std::vector<double> smote_time(static_cast<std::size_t>(n_weak), 0.0);
  std::vector<double> tree_time(static_cast<std::size_t>(n_weak), 0.0);
  parallel_for(n_weak, threads, [&](std::int64_t t) {
    const auto i = static_cast<std::size_t>(t);
    const auto t_tree = Clock::now();
    struct Stamp {
      double& slot;
      Clock::time_point t0;
      ~Stamp() { slot = seconds_since(t0); }
    } stamp{tree_time[i], t_tree};
    try {
      grown[i] = grow_tree(data, normalized, static_cast<int>(t) + 1, n_weak, sets[i], n_classes, hyper, &smote_time[i]);
    } catch (const std::exception& e) {
      errors[i] = "tree " + std::to_string(t + 1) + ": " + e.what();
    }
  });

  TrainReport rep;
  for (std::size_t i = 0; i < grown.size(); ++i) {
    if (grown[i]) {
      model.trees.push_back(std::move(*grown[i]));
    } else {
      rep.tree_errors.push_back(errors[i]);
    }
  }
  if (model.trees.empty()) throw Error(ErrorKind::kEmptySet, "every tree failed: " + rep.tree_errors.front());

  std::vector<std::int64_t> voxels(static_cast<std::size_t>(n_classes), 0);
  for (const auto& d : data)
    for (const auto& h : d.voxel_hist)
      for (int c = 0; c < n_classes; ++c) voxels[static_cast<std::size_t>(c)] += h[static_cast<std::size_t>(c)];
  rep.degenerate = std::count_if(voxels.begin(), voxels.end(), [](std::int64_t n) { return n > 0; }) < 2;
  rep.n_trees = static_cast<int>(model.trees.size());
  // Phase times are summed over trees, so they are CPU-style totals when trees run in parallel.
  for (std::size_t i = 0; i < smote_time.size(); ++i) {
    rep.times.smote += smote_time[i];
    rep.times.tree_optimization += std::max(0.0, tree_time[i] - smote_time[i]);
  }
  for (const auto& tree : model.trees)
    for (const auto& node : tree.nodes) {
      ++rep.n_nodes;
      if (node.leaf) ++rep.n_leaves;
      if (!node.converged) ++rep.n_not_converged;
      if (!node.leaf)
        for (int ch : node.children)
          if (ch < 0) ++rep.n_pruned_branches;
    }
  rep.times.features = t_norm;
  if (report) {
    rep.times.pyramid += report->times.pyramid;
    rep.times.features += report->times.features;
    *report = rep;
  }
  return model;
}

// ---------------------------------------------------------------------------
// Prediction.

Prediction aggregate(const std::vector<NodeVisit>& visits, int n_classes) {
  if (visits.empty()) throw Error(ErrorKind::kEmptySet, "no tree visits to aggregate");
  std::vector<double> abar(static_cast<std::size_t>(n_classes), 0.0);
  double h = 0.0;
  for (const auto& v : visits) {
    if (static_cast<int>(v.probs.size()) != n_classes) throw Error(ErrorKind::kDimensionMismatch, "visit probability width");
    for (int c = 0; c < n_classes; ++c) abar[static_cast<std::size_t>(c)] += v.accuracy * v.probs[static_cast<std::size_t>(c)];
    h += v.difficulty;
  }
  const double n = static_cast<double>(visits.size());
  for (auto& a : abar) a /= n;
  const double top = *std::max_element(abar.begin(), abar.end());
  Prediction p;
  p.probs.resize(abar.size());
  double z = 0.0;
  for (std::size_t c = 0; c < abar.size(); ++c) z += (p.probs[c] = std::exp(abar[c] - top));
  for (auto& x : p.probs) x /= z;
  p.label = static_cast<ClassIndex>(std::max_element(p.probs.begin(), p.probs.end()) - p.probs.begin());
  p.reliability = std::exp(-h / n);
  return p;
}

namespace {

/// Global class chosen by `node` for each patch in `group`.
std::vector<ClassIndex> classify_group(const TreeNode& node, const Tree& tree, const MatrixXd& normalized_layer,
                                       const std::vector<PatchId>& group, bool batch_normalize) {
  std::vector<ClassIndex> out(group.size(), node.classes.empty() ? 0 : node.classes.front());
  if (!node.disc) return out;
  const auto& d = *node.disc;
  const auto m = static_cast<Eigen::Index>(d.selected_indices.size());
  const auto n = static_cast<Eigen::Index>(group.size());
  MatrixXd x(n, m);
  VectorXd subset(static_cast<Eigen::Index>(tree.features.size()));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < tree.features.size(); ++j)
      subset[static_cast<Eigen::Index>(j)] = normalized_layer(group[static_cast<std::size_t>(i)], tree.features[j]);
    for (Eigen::Index j = 0; j < m; ++j) x(i, j) = squared_feature_value(subset, d.selected_indices[static_cast<std::size_t>(j)]);
  }
  if (batch_normalize && n >= 2) {
    x = fit_normalizer(x).apply_rows(x);
  } else {
    for (Eigen::Index j = 0; j < m; ++j)
      for (Eigen::Index i = 0; i < n; ++i) x(i, j) = d.normalize_selected(static_cast<std::size_t>(j), x(i, j));
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const ClassIndex local = d.classify_scores(d.decision_scores_selected(x.row(i).transpose()));
    out[static_cast<std::size_t>(i)] = node.classes[static_cast<std::size_t>(local)];
  }
  return out;
}

NodeVisit visit_of(const TreeNode& node) { return {node.probs, node.accuracy, node.difficulty}; }

}  // namespace

VolumePrediction predict_volume(const Model& model, const PreparedVolume& volume, const PredictOptions& options) {
  if (model.trees.empty()) throw Error(ErrorKind::kEmptySet, "model has no trees");
  const int n_lay = model.n_layers();
  if (volume.pyramid.n_layers() != n_lay) throw Error(ErrorKind::kDimensionMismatch, "pyramid depth differs from model");
  if (volume.volume->n_channels() != model.schema.n_channels)
    throw Error(ErrorKind::kUnknownSchema, "volume channel count does not match the model schema");
  const int k = model.n_classes;
  const auto& pyr = volume.pyramid;

  std::vector<MatrixXd> normalized(static_cast<std::size_t>(n_lay + 1));
  for (int r = 1; r <= n_lay; ++r) {
    const auto& raw = volume.features[static_cast<std::size_t>(r)];
    if (raw.cols() != model.schema.n_tot()) throw Error(ErrorKind::kUnknownSchema, "feature width does not match schema");
    normalized[static_cast<std::size_t>(r)] = model.layer_norms[static_cast<std::size_t>(r - 1)].apply_rows(raw);
  }

  const auto n_trees = static_cast<std::int64_t>(model.trees.size());
  VolumePrediction out;
  out.visits.assign(static_cast<std::size_t>(n_trees), std::vector<std::vector<int>>(static_cast<std::size_t>(n_lay + 1)));

  parallel_for(n_trees, options.threads, [&](std::int64_t t) {
    const Tree& tree = model.trees[static_cast<std::size_t>(t)];
    auto& visits = out.visits[static_cast<std::size_t>(t)];
    std::vector<int> next_above, visit_above;
    for (int r = n_lay; r >= 1; --r) {
      const auto n = static_cast<std::size_t>(pyr.layer(r).size());
      std::vector<int> handler(n, 0), visit(n, -1), next(n, -1);
      if (r < n_lay)
        for (std::size_t q = 0; q < n; ++q) {
          const auto p = static_cast<std::size_t>(pyr.parent(r, static_cast<PatchId>(q)));
          handler[q] = next_above[p];
          if (handler[q] < 0) visit[q] = visit_above[p];
        }
      const auto& feats = normalized[static_cast<std::size_t>(r)];
      std::vector<int> leaf_visit;
      if (r == 1) leaf_visit = visit;

      // Waves: at r >= 2 a single wave; at r = 1 repeat until every patch sits on a leaf.
      std::vector<PatchId> frontier;
      for (std::size_t q = 0; q < n; ++q)
        if (handler[q] >= 0) frontier.push_back(static_cast<PatchId>(q));
      while (!frontier.empty()) {
        std::map<int, std::vector<PatchId>> groups;
        for (PatchId q : frontier) groups[handler[static_cast<std::size_t>(q)]].push_back(q);
        std::vector<PatchId> still;
        for (const auto& [node_id, group] : groups) {
          const TreeNode& node = tree.nodes[static_cast<std::size_t>(node_id)];
          if (node.leaf) {
            for (PatchId q : group) {
              leaf_visit[static_cast<std::size_t>(q)] = node_id;
              if (visit[static_cast<std::size_t>(q)] < 0) visit[static_cast<std::size_t>(q)] = node_id;
            }
            continue;
          }
          const auto cls = classify_group(node, tree, feats, group, options.batch_normalize);
          for (std::size_t i = 0; i < group.size(); ++i) {
            const auto q = static_cast<std::size_t>(group[i]);
            visit[q] = node_id;
            const int child = node.children[static_cast<std::size_t>(cls[i])];
            if (r >= 2) {
              next[q] = child;
            } else if (child < 0) {
              leaf_visit[q] = node_id;
            } else {
              handler[q] = child;
              still.push_back(group[i]);
            }
          }
        }
        frontier = std::move(still);
        if (r >= 2) break;
      }
      visits[static_cast<std::size_t>(r)] = visit;
      if (r == 1) visits[0] = leaf_visit;
      next_above = std::move(next);
      visit_above = std::move(visit);
    }
  });

  auto aggregate_layer = [&](int r, std::size_t n) {
    LayerPrediction lp;
    lp.probs.resize(static_cast<Eigen::Index>(n), k);
    lp.labels.resize(n);
    lp.reliability.resize(static_cast<Eigen::Index>(n));
    std::vector<NodeVisit> vs(static_cast<std::size_t>(n_trees));
    for (std::size_t q = 0; q < n; ++q) {
      for (std::int64_t t = 0; t < n_trees; ++t) {
        const auto& tree = model.trees[static_cast<std::size_t>(t)];
        vs[static_cast<std::size_t>(t)] = visit_of(tree.nodes[static_cast<std::size_t>(out.visits[static_cast<std::size_t>(t)][static_cast<std::size_t>(r)][q])]);
      }
      const auto p = aggregate(vs, k);
      for (int c = 0; c < k; ++c) lp.probs(static_cast<Eigen::Index>(q), c) = p.probs[static_cast<std::size_t>(c)];
      lp.labels[q] = p.label;
      lp.reliability[static_cast<Eigen::Index>(q)] = p.reliability;
    }
    return lp;
  };

  out.layers.resize(static_cast<std::size_t>(n_lay + 1));
  for (int r = 1; r <= n_lay; ++r) out.layers[static_cast<std::size_t>(r)] = aggregate_layer(r, static_cast<std::size_t>(pyr.layer(r).size()));
  if (options.voxels) {
    const LayerPrediction leaves = aggregate_layer(0, static_cast<std::size_t>(pyr.layer(1).size()));
    const auto& dims = pyr.dims();
    LayerPrediction& vox = out.layers[0];
    const auto n = static_cast<Eigen::Index>(dims.count());
    vox.probs.resize(n, k);
    vox.labels.resize(static_cast<std::size_t>(n));
    vox.reliability.resize(n);
    for (int z = 0; z < dims.z; ++z)
      for (int y = 0; y < dims.y; ++y)
        for (int x = 0; x < dims.x; ++x) {
          const auto v = dims.index(x, y, z);
          const auto q = pyr.layer1_patch_of_voxel(x, y, z);
          vox.probs.row(v) = leaves.probs.row(q);
          vox.labels[static_cast<std::size_t>(v)] = leaves.labels[static_cast<std::size_t>(q)];
          vox.reliability[v] = leaves.reliability[q];
        }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Consolidation.

std::vector<int> node_global_indices(const Model& model, const Tree& tree, const TreeNode& node) {
  std::vector<int> out;
  if (!node.disc) return out;
  for (int k : node.disc->selected_indices) out.push_back(global_squared_index(model.schema.n_tot(), tree.features, k));
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> consolidate_resolution_specific(const Model& model, int layer) {
  std::set<int> ids;
  for (const auto& tree : model.trees)
    for (const auto& node : tree.nodes)
      if (node.layer == layer && !node.leaf)
        for (int g : node_global_indices(model, tree, node)) ids.insert(g);
  return {ids.begin(), ids.end()};
}

IndependentSelection select_above_median(const std::vector<std::pair<int, double>>& scored) {
  IndependentSelection sel;
  if (scored.empty()) return sel;
  std::vector<double> s;
  for (const auto& [id, score] : scored) s.push_back(score);
  std::sort(s.begin(), s.end());
  const std::size_t mid = s.size() / 2;
  const double median = s.size() % 2 ? s[mid] : (s[mid - 1] + s[mid]) / 2.0;
  for (const auto& [id, score] : scored)
    if (score > median) sel.indices.push_back(id);
  if (sel.indices.empty()) {
    sel.fallback = true;
    for (const auto& [id, score] : scored) sel.indices.push_back(id);
  }
  std::sort(sel.indices.begin(), sel.indices.end());
  sel.indices.erase(std::unique(sel.indices.begin(), sel.indices.end()), sel.indices.end());
  return sel;
}

IndependentSelection consolidate_resolution_independent(const Model& model) {
  std::map<int, double> score;
  for (const auto& tree : model.trees)
    for (const auto& node : tree.nodes) {
      if (!node.disc) continue;
      const auto& d = *node.disc;
      for (int k : d.selected_indices) {
        const int g = global_squared_index(model.schema.n_tot(), tree.features, k);
        const double mag = d.betas.col(k).cwiseAbs().maxCoeff();
        auto [it, inserted] = score.emplace(g, mag);
        if (!inserted) it->second = std::max(it->second, mag);
      }
    }
  return select_above_median({score.begin(), score.end()});
}

}  // namespace hqrf
