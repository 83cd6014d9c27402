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

#include "hqrf/commands.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "hqrf/error.hpp"
#include "hqrf/hyperopt.hpp"
#include "hqrf/model_io.hpp"
#include "hqrf/records.hpp"
#include "hqrf/synth.hpp"
#include "hqrf/volume.hpp"

namespace hqrf {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json parse_json_file(const fs::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kBadConfig, path.string() + " is not valid JSON: " + e.what());
  }
}

void write_json_atomic(const fs::path& path, const json& j) { write_file_atomic(path, j.dump(2) + "\n"); }

std::vector<LabeledVolume> load_volumes(const std::vector<fs::path>& paths, bool need_labels) {
  std::vector<LabeledVolume> out;
  out.reserve(paths.size());
  for (const auto& p : paths) {
    out.push_back(read_mrv(p));
    if (need_labels && !out.back().has_labels()) throw Error(ErrorKind::kFormat, p.string() + " carries no labels");
  }
  return out;
}

std::vector<PreparedVolume> prepare_all(const std::vector<LabeledVolume>& volumes, int n_layers, int n_classes,
                                        int threads, PhaseTimes* times) {
  std::vector<PreparedVolume> out;
  out.reserve(volumes.size());
  for (const auto& v : volumes) out.push_back(prepare_volume(v, n_layers, n_classes, threads, times));
  return out;
}

Confusion voxel_confusion(const Model& model, const std::vector<PreparedVolume>& volumes, int threads) {
  Confusion total(static_cast<std::size_t>(model.n_classes), std::vector<std::int64_t>(static_cast<std::size_t>(model.n_classes), 0));
  PredictOptions po;
  po.threads = threads;
  for (const auto& v : volumes) {
    const auto pred = predict_volume(model, v, po);
    const auto c = confusion_matrix(pred.layers[0].labels, v.volume->labels, model.n_classes);
    for (std::size_t i = 0; i < c.size(); ++i)
      for (std::size_t j = 0; j < c.size(); ++j) total[i][j] += c[i][j];
  }
  return total;
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(precision) << v;
  return ss.str();
}

}  // namespace

std::vector<fs::path> Manifest::split(const std::string& name) const {
  std::vector<fs::path> out;
  for (const auto& e : volumes)
    if (e.split == name) out.push_back(e.path);
  return out;
}

std::vector<ClassIndex> Manifest::foreground() const {
  std::vector<ClassIndex> out;
  for (int c = 0; c < n_classes; ++c)
    if (std::find(background.begin(), background.end(), c) == background.end()) out.push_back(c);
  return out;
}

Manifest load_manifest(const fs::path& path) {
  const json j = parse_json_file(path);
  Manifest m;
  m.file = path;
  try {
    m.n_classes = j.at("n_classes").get<int>();
    if (m.n_classes < 1) throw Error(ErrorKind::kBadConfig, "n_classes must be positive");
    m.class_names = j.value("class_names", std::vector<std::string>{});
    if (m.class_names.empty())
      for (int c = 0; c < m.n_classes; ++c) m.class_names.push_back("class" + std::to_string(c + 1));
    if (static_cast<int>(m.class_names.size()) != m.n_classes) throw Error(ErrorKind::kBadConfig, "class_names length");
    for (int b : j.value("background", std::vector<int>{})) {
      if (b < 1 || b > m.n_classes) throw Error(ErrorKind::kBadConfig, "background id outside 1..n_classes");
      m.background.push_back(b - 1);
    }
    const fs::path base = path.parent_path();
    for (const auto& e : j.at("volumes")) {
      Manifest::Entry entry;
      entry.path = base / e.at("path").get<std::string>();
      entry.split = e.at("split").get<std::string>();
      if (entry.split != "train" && entry.split != "val" && entry.split != "test")
        throw Error(ErrorKind::kBadConfig, "unknown split '" + entry.split + "'");
      if (!fs::exists(entry.path)) throw Error(ErrorKind::kIo, "missing volume " + entry.path.string());
      m.volumes.push_back(std::move(entry));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kBadConfig, "malformed manifest: " + std::string(e.what()));
  }
  return m;
}

Hyperparams default_hyperparams() {
  Hyperparams h;
  h.n_layers = 5;
  h.d1 = 4;
  h.g_tree = 1e-3;
  h.lambdas = {0.18, 0.27, 0.52, 0.38, 0.15};
  h.seed = 1;
  return h;
}

// ---------------------------------------------------------------------------

void cmd_synth(const SynthOptions& o, std::ostream& log) {
  if (o.preset != "blocks" && o.preset != "concentric") throw Error(ErrorKind::kBadConfig, "unknown preset '" + o.preset + "'");
  if (o.n_train < 0 || o.n_val < 0 || o.n_test < 0 || o.n_train + o.n_val + o.n_test == 0)
    throw Error(ErrorKind::kBadConfig, "volume counts must be nonnegative and not all zero");
  fs::create_directories(o.out);
  json manifest;
  json volumes = json::array();
  int n_classes = 0;
  int counter = 0;
  for (const auto& [split, count] : {std::pair<std::string, int>{"train", o.n_train}, {"val", o.n_val}, {"test", o.n_test}})
    for (int i = 0; i < count; ++i, ++counter) {
      LabeledVolume v;
      const std::uint64_t seed = mix_seed(o.seed, static_cast<std::uint64_t>(counter));
      if (o.preset == "blocks") {
        BlocksConfig cfg;
        cfg.dims = o.dims;
        if (o.noise) cfg.noise = *o.noise;
        v = synth_blocks(cfg, seed);
        n_classes = kBlocksClasses;
      } else {
        ConcentricConfig cfg;
        cfg.dims = o.dims;
        const double m = std::min({o.dims.x, o.dims.y, o.dims.z}) / 2.0;
        cfg.radii = {0.7 * m, 0.35 * m};
        if (o.noise) cfg.noise = *o.noise;
        v = synth_concentric(cfg, seed);
        n_classes = static_cast<int>(cfg.radii.size()) + 1;
      }
      const std::string name = split + "_" + std::to_string(i) + ".mrv";
      write_mrv(o.out / name, v);
      volumes.push_back({{"path", name}, {"split", split}});
      log << "wrote " << (o.out / name).string() << "\n";
    }
  manifest["n_classes"] = n_classes;
  std::vector<std::string> names;
  if (o.preset == "blocks") {
    names = {"background", "block_a", "block_b", "block_c"};
  } else {
    for (int c = 0; c < n_classes; ++c) names.push_back(c == 0 ? "outside" : "shell" + std::to_string(c));
  }
  manifest["class_names"] = names;
  manifest["background"] = std::vector<int>{1};
  manifest["volumes"] = volumes;
  manifest["preset"] = o.preset;
  manifest["seed"] = o.seed;
  write_json_atomic(o.out / "manifest.json", manifest);
  log << "wrote " << (o.out / "manifest.json").string() << "\n";
}

json cmd_train(const TrainOptions& o, std::ostream& log) {
  const Manifest m = load_manifest(o.manifest);
  const auto train_paths = m.split("train");
  if (train_paths.empty()) throw Error(ErrorKind::kBadConfig, "manifest has no train volumes");
  Hyperparams base = o.hyper ? hyperparams_from_json(parse_json_file(*o.hyper)) : default_hyperparams();
  if (o.seed) base.seed = *o.seed;
  base.validate();

  const auto train_vols = load_volumes(train_paths, true);
  TrainReport report;
  const auto prepared = prepare_all(train_vols, base.n_layers, m.n_classes, o.threads, &report.times);
  const PhaseTimes prep_times = report.times;

  json rep;
  Model model;
  if (o.grids) {
    const Grids grids = grids_from_json(parse_json_file(*o.grids));
    const auto val_paths = m.split("val");
    if (val_paths.empty()) throw Error(ErrorKind::kBadConfig, "hyperparameter search needs val volumes");
    const auto val_vols = load_volumes(val_paths, true);
    const auto val_prepared = prepare_all(val_vols, base.n_layers, m.n_classes, o.threads, nullptr);
    const auto fg = m.foreground();
    TrainReport last;
    auto search = random_search(
        base, grids, base.seed, o.max_trials,
        [&](const Hyperparams& h) {
          last.times = prep_times;
          return train_forest(prepared, m.n_classes, h, o.threads, &last);
        },
        [&](const Model& candidate) {
          const auto score = macro_from_confusion(voxel_confusion(candidate, val_prepared, o.threads), fg);
          return std::pair<double, double>{score.precision, score.recall};
        });
    if (!search.best) throw Error(ErrorKind::kEmptySet, "every hyperparameter trial failed");
    std::string trials;
    for (const auto& t : search.log) {
      trials += trial_to_json(t).dump() + "\n";
      log << "trial " << t.index << (t.failed ? " failed: " + t.error : " combined " + fmt(t.combined)) << "\n";
    }
    write_file_atomic(fs::path(o.model_out.string() + ".trials.jsonl"), trials);
    model = std::move(*search.best);
    // retrain bookkeeping of the winning trial for the report
    report.times = prep_times;
    model = train_forest(prepared, m.n_classes, model.hyper, o.threads, &report);
    rep["search"] = {{"trials", search.log.size()}, {"best_trial", search.best_trial},
                     {"best_combined", search.best_combined}, {"stopped_early", search.stopped_early}};
  } else {
    model = train_forest(prepared, m.n_classes, base, o.threads, &report);
  }
  model.class_names = m.class_names;
  save_model(o.model_out, model);

  rep["model"] = o.model_out.filename().string();
  rep["timings_seconds"] = {{"pyramid", report.times.pyramid},
                            {"features", report.times.features},
                            {"smote", report.times.smote},
                            {"tree_optimization", report.times.tree_optimization}};
  rep["degenerate"] = report.degenerate;
  rep["n_trees"] = report.n_trees;
  rep["tree_errors"] = report.tree_errors;
  rep["n_nodes"] = report.n_nodes;
  rep["n_leaves"] = report.n_leaves;
  rep["n_pruned_branches"] = report.n_pruned_branches;
  rep["n_not_converged"] = report.n_not_converged;
  rep["hyperparams"] = hyperparams_to_json(model.hyper);
  write_json_atomic(fs::path(o.model_out.string() + ".report.json"), rep);
  log << "trained " << report.n_trees << " trees (" << report.n_nodes << " nodes) -> " << o.model_out.string() << "\n";
  if (report.degenerate) log << "warning: training data contains a single class\n";
  return rep;
}

LabeledVolume prediction_volume(const Dims& dims, const LayerPrediction& voxels, int n_classes) {
  LabeledVolume v;
  v.dims = dims;
  const auto n = static_cast<std::size_t>(dims.count());
  if (voxels.labels.size() != n) throw Error(ErrorKind::kDimensionMismatch, "voxel predictions do not cover the volume");
  v.channels.assign(static_cast<std::size_t>(n_classes + 1), std::vector<float>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < n_classes; ++c)
      v.channels[static_cast<std::size_t>(c)][i] = static_cast<float>(voxels.probs(static_cast<Eigen::Index>(i), c));
    v.channels[static_cast<std::size_t>(n_classes)][i] = static_cast<float>(voxels.reliability[static_cast<Eigen::Index>(i)]);
  }
  v.labels = voxels.labels;
  return v;
}

void cmd_predict(const PredictCmdOptions& o, std::ostream& log) {
  const Manifest m = load_manifest(o.manifest);
  const Model model = load_model(o.model);
  if (model.n_classes != m.n_classes) throw Error(ErrorKind::kUnknownSchema, "model and manifest disagree on n_classes");
  const auto paths = m.split(o.split);
  if (paths.empty()) throw Error(ErrorKind::kBadConfig, "manifest has no '" + o.split + "' volumes");
  fs::create_directories(o.out);
  write_json_atomic(o.out / "features.json", features_sidecar(model));
  PredictOptions po;
  po.batch_normalize = o.batch_normalize;
  po.threads = o.threads;
  for (const auto& p : paths) {
    const LabeledVolume v = read_mrv(p);
    if (v.n_channels() != model.schema.n_channels)
      throw Error(ErrorKind::kUnknownSchema, p.string() + " has " + std::to_string(v.n_channels()) + " channels, model expects " +
                                                 std::to_string(model.schema.n_channels));
    const auto prepared = prepare_volume(v, model.n_layers(), model.n_classes, o.threads);
    const auto pred = predict_volume(model, prepared, po);
    const std::string stem = p.stem().string();
    write_mrv(o.out / (stem + ".pred.mrv"), prediction_volume(v.dims, pred.layers[0], model.n_classes));
    std::ostringstream records;
    RecordOptions ro;
    ro.volume_name = stem;
    ro.voxels = o.export_voxels;
    const auto n = write_graph_records(records, model, prepared, pred, ro);
    write_file_atomic(o.out / (stem + ".records.jsonl"), records.str());
    log << stem << ": " << n << " records\n";
  }
}

json metrics_json(const Confusion& confusion, std::span<const ClassIndex> foreground) {
  const auto macro = macro_from_confusion(confusion, foreground);
  json per = json::array();
  for (const auto& s : macro.per_class)
    per.push_back({{"class", s.cls + 1}, {"precision", s.precision}, {"recall", s.recall}, {"tp", s.tp}, {"fp", s.fp}, {"fn", s.fn}});
  return {{"macro_precision", macro.precision}, {"macro_recall", macro.recall}, {"per_class", per}, {"confusion", confusion}};
}

json cmd_eval(const EvalOptions& o, std::ostream& log) {
  const Manifest m = load_manifest(o.manifest);
  const auto paths = m.split(o.split);
  if (paths.empty()) throw Error(ErrorKind::kBadConfig, "manifest has no '" + o.split + "' volumes");
  const auto fg = m.foreground();
  const int k = m.n_classes;
  auto zero = [&]() { return Confusion(static_cast<std::size_t>(k), std::vector<std::int64_t>(static_cast<std::size_t>(k), 0)); };
  std::map<int, Confusion> per_layer;
  auto add = [&](int r, const Confusion& c) {
    auto [it, inserted] = per_layer.try_emplace(r, zero());
    for (std::size_t i = 0; i < c.size(); ++i)
      for (std::size_t j = 0; j < c.size(); ++j) it->second[i][j] += c[i][j];
  };

  for (const auto& p : paths) {
    const LabeledVolume ref = read_mrv(p);
    if (!ref.has_labels()) throw Error(ErrorKind::kFormat, p.string() + " carries no reference labels");
    const std::string stem = p.stem().string();
    const LabeledVolume pred = read_mrv(o.predictions / (stem + ".pred.mrv"));
    if (!(pred.dims == ref.dims) || !pred.has_labels())
      throw Error(ErrorKind::kMisalignment, stem + ": prediction grid does not match the reference volume");
    add(0, confusion_matrix(pred.labels, ref.labels, k));

    const fs::path rec_path = o.predictions / (stem + ".records.jsonl");
    if (!fs::exists(rec_path)) continue;
    std::map<int, std::vector<std::pair<PatchId, ClassIndex>>> by_layer;
    std::istringstream lines(read_file(rec_path));
    int n_lay = 0;
    for (std::string line; std::getline(lines, line);) {
      if (line.empty()) continue;
      const json r = json::parse(line);
      const int layer = r.at("layer").get<int>();
      if (layer < 1) continue;
      n_lay = std::max(n_lay, layer);
      by_layer[layer].emplace_back(r.at("id").get<PatchId>(), r.at("label").get<int>() - 1);
    }
    if (n_lay == 0) continue;
    const Pyramid pyr(ref.dims, n_lay);
    const LabelTables tables(ref, k);
    for (const auto& [layer, items] : by_layer) {
      const auto& g = pyr.layer(layer);
      if (static_cast<std::int64_t>(items.size()) != g.size())
        throw Error(ErrorKind::kMisalignment, stem + ": layer " + std::to_string(layer) + " record count differs from the pyramid");
      std::vector<ClassIndex> predicted, reference;
      for (const auto& [id, label] : items) {
        if (id < 0 || id >= g.size()) throw Error(ErrorKind::kMisalignment, "record id out of range");
        predicted.push_back(label);
        reference.push_back(label_stats_from_histogram(tables.histogram(g.origin(id), g.side)).ref_label);
      }
      add(layer, confusion_matrix(predicted, reference, k));
    }
  }

  json report;
  report["split"] = o.split;
  report["foreground"] = [&] {
    std::vector<int> ids;
    for (auto c : fg) ids.push_back(c + 1);
    return ids;
  }();
  json layers = json::object();
  for (const auto& [layer, conf] : per_layer) {
    layers[std::to_string(layer)] = metrics_json(conf, fg);
    const auto& lj = layers[std::to_string(layer)];
    log << "layer " << layer << ": macro precision " << fmt(lj["macro_precision"].get<double>()) << ", macro recall "
        << fmt(lj["macro_recall"].get<double>()) << "\n";
  }
  report["layers"] = layers;
  write_json_atomic(o.out ? *o.out : o.predictions / "eval.json", report);
  return report;
}

void cmd_inspect(const fs::path& path, std::ostream& out) {
  const Model model = load_model(path);
  const auto raw = model.schema.names();
  out << "model " << path.filename().string() << ": schema " << model.schema.id << " (" << model.schema.n_tot()
      << " raw features), " << model.n_classes << " classes, " << model.trees.size() << " trees, "
      << model.n_layers() << " layers\n";
  auto probs_str = [](const std::vector<double>& p) {
    std::string s = "[";
    for (std::size_t i = 0; i < p.size(); ++i) s += (i ? ", " : "") + fmt(p[i]);
    return s + "]";
  };
  for (const auto& tree : model.trees) {
    out << "tree " << tree.index << " features:";
    for (int f : tree.features) out << " " << raw[static_cast<std::size_t>(f)];
    out << "\n";
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
      const auto& n = tree.nodes[i];
      out << "  node " << i << " layer " << n.layer << " depth " << n.depth << " "
          << (n.leaf ? "leaf" : (n.disc ? "decision" : "passthrough")) << "\n";
      if (!n.leaf) {
        out << "    selected:";
        if (!n.disc || n.disc->selected_indices.empty()) out << " (none)";
        if (n.disc)
          for (int k : n.disc->selected_indices) {
            const int g = global_squared_index(model.schema.n_tot(), tree.features, k);
            out << " " << squared_feature_name(raw, g) << "(|b|=" << fmt(n.disc->betas.col(k).cwiseAbs().maxCoeff()) << ")";
          }
        out << "\n    thresholds:";
        if (n.disc)
          for (double t : n.disc->thresholds) out << " " << fmt(t, 6);
        else
          out << " (none)";
        out << "\n    children:";
        for (int c : n.children) out << " " << c;
        out << "\n";
      }
      out << "    probs: " << probs_str(n.probs) << "\n    accuracy: " << fmt(n.accuracy)
          << "\n    difficulty: " << fmt(n.difficulty) << "\n";
    }
  }
  for (int r = model.n_layers(); r >= 1; --r) {
    out << "resolution-specific layer " << r << ":";
    for (int g : consolidate_resolution_specific(model, r)) out << " " << squared_feature_name(raw, g);
    out << "\n";
  }
  const auto ind = consolidate_resolution_independent(model);
  out << "resolution-independent" << (ind.fallback ? " (all scores tied, full union)" : "") << ":";
  for (int g : ind.indices) out << " " << squared_feature_name(raw, g);
  out << "\n";
}

}  // namespace hqrf
