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

#include "hqrf/model_io.hpp"

#include "hqrf/error.hpp"
#include "hqrf/volume.hpp"

namespace hqrf {

using nlohmann::json;

namespace {

json vec_json(const VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

VectorXd json_vec(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json mat_json(const MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(vec_json(m.row(r).transpose()));
  return rows;
}

MatrixXd json_mat(const json& j, Eigen::Index cols) {
  MatrixXd m(static_cast<Eigen::Index>(j.size()), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    const auto row = j[r].get<std::vector<double>>();
    if (static_cast<Eigen::Index>(row.size()) != cols) throw Error(ErrorKind::kFormat, "ragged matrix in model");
    for (Eigen::Index c = 0; c < cols; ++c) m(static_cast<Eigen::Index>(r), c) = row[static_cast<std::size_t>(c)];
  }
  return m;
}

json node_json(const TreeNode& n) {
  json j;
  j["layer"] = n.layer;
  j["depth"] = n.depth;
  j["kind"] = n.leaf ? "leaf" : (n.disc ? "decision" : "passthrough");
  j["classes"] = n.classes;
  j["probs"] = n.probs;
  j["accuracy"] = n.accuracy;
  j["difficulty"] = n.difficulty;
  j["n_samples"] = n.n_samples;
  j["n_balanced"] = n.n_balanced;
  j["converged"] = n.converged;
  if (!n.leaf) j["children"] = n.children;
  if (n.disc) {
    const auto& d = *n.disc;
    j["selected_indices"] = d.selected_indices;
    j["betas"] = mat_json(d.betas);
    j["class_means"] = mat_json(d.class_means);
    j["log_priors"] = vec_json(d.log_priors);
    j["thresholds"] = d.thresholds;
    j["norm_means"] = vec_json(d.norm_means);
    j["norm_stds"] = vec_json(d.norm_stds);
  }
  return j;
}

TreeNode node_from_json(const json& j, int n_feat) {
  TreeNode n;
  n.layer = j.at("layer").get<int>();
  n.depth = j.at("depth").get<int>();
  const auto kind = j.at("kind").get<std::string>();
  if (kind != "leaf" && kind != "decision" && kind != "passthrough") throw Error(ErrorKind::kFormat, "unknown node kind " + kind);
  n.leaf = kind == "leaf";
  n.classes = j.at("classes").get<std::vector<ClassIndex>>();
  n.probs = j.at("probs").get<std::vector<double>>();
  n.accuracy = j.at("accuracy").get<double>();
  n.difficulty = j.at("difficulty").get<double>();
  n.n_samples = j.at("n_samples").get<std::int64_t>();
  n.n_balanced = j.at("n_balanced").get<std::int64_t>();
  n.converged = j.at("converged").get<bool>();
  if (!n.leaf) n.children = j.at("children").get<std::vector<int>>();
  if (kind == "decision") {
    NodeDiscriminant<double> d;
    d.selected_indices = j.at("selected_indices").get<std::vector<int>>();
    d.betas = json_mat(j.at("betas"), n_feat);
    d.class_means = json_mat(j.at("class_means"), n_feat);
    d.log_priors = json_vec(j.at("log_priors"));
    d.thresholds = j.at("thresholds").get<std::vector<double>>();
    d.norm_means = json_vec(j.at("norm_means"));
    d.norm_stds = json_vec(j.at("norm_stds"));
    const auto k = static_cast<Eigen::Index>(n.classes.size());
    if (d.betas.rows() != k || d.class_means.rows() != k || d.log_priors.size() != k ||
        static_cast<Eigen::Index>(d.thresholds.size()) + 1 != k || d.norm_means.size() != n_feat ||
        d.norm_stds.size() != n_feat)
      throw Error(ErrorKind::kFormat, "decision node shapes are inconsistent");
    for (int h : d.selected_indices)
      if (h < 0 || h >= n_feat) throw Error(ErrorKind::kFormat, "selected index out of range");
    d.finalize();
    n.disc = std::move(d);
  }
  return n;
}

}  // namespace

json hyperparams_to_json(const Hyperparams& h) {
  return json{{"n_layers", h.n_layers}, {"d1", h.d1},         {"g_tree", h.g_tree},       {"lambdas", h.lambdas},
              {"seed", h.seed},         {"n_grid", h.n_grid}, {"max_iters", h.max_iters}, {"tol", h.tol}};
}

Hyperparams hyperparams_from_json(const json& j) {
  Hyperparams h;
  h.n_layers = j.value("n_layers", h.n_layers);
  h.d1 = j.value("d1", h.d1);
  h.g_tree = j.value("g_tree", h.g_tree);
  h.seed = j.value("seed", h.seed);
  h.n_grid = j.value("n_grid", h.n_grid);
  h.max_iters = j.value("max_iters", h.max_iters);
  h.tol = j.value("tol", h.tol);
  if (j.contains("lambdas")) {
    h.lambdas = j.at("lambdas").get<std::vector<double>>();
  } else {
    h.lambdas.assign(static_cast<std::size_t>(h.n_layers), 0.1);
  }
  return h;
}

json model_to_json(const Model& model) {
  json j;
  j["format"] = "hqrf-model";
  j["format_version"] = kModelFormatVersion;
  json schema;
  schema["id"] = model.schema.id;
  schema["n_channels"] = model.schema.n_channels;
  schema["names"] = model.schema.names();
  j["schema"] = schema;
  j["n_classes"] = model.n_classes;
  j["class_names"] = model.class_names;
  j["hyperparams"] = hyperparams_to_json(model.hyper);
  json norms = json::array();
  for (const auto& n : model.layer_norms) norms.push_back({{"means", vec_json(n.means)}, {"stds", vec_json(n.stds)}});
  j["layer_norms"] = norms;
  json trees = json::array();
  for (const auto& t : model.trees) {
    json tj;
    tj["index"] = t.index;
    tj["seed"] = t.seed;
    tj["features"] = t.features;
    json nodes = json::array();
    for (const auto& n : t.nodes) nodes.push_back(node_json(n));
    tj["nodes"] = nodes;
    trees.push_back(tj);
  }
  j["trees"] = trees;
  return j;
}

Model model_from_json(const json& j) {
  try {
    if (j.value("format", std::string()) != "hqrf-model") throw Error(ErrorKind::kFormat, "not an hqrf model file");
    const int version = j.at("format_version").get<int>();
    if (version != kModelFormatVersion)
      throw Error(ErrorKind::kFormat, "unsupported model format version " + std::to_string(version));
    Model m;
    m.format_version = version;
    const auto& s = j.at("schema");
    m.schema = schema_by_id(s.at("id").get<std::string>(), s.at("n_channels").get<int>());
    if (s.at("names").get<std::vector<std::string>>() != m.schema.names())
      throw Error(ErrorKind::kUnknownSchema, "schema names differ from " + m.schema.id);
    m.n_classes = j.at("n_classes").get<int>();
    m.class_names = j.at("class_names").get<std::vector<std::string>>();
    m.hyper = hyperparams_from_json(j.at("hyperparams"));
    m.hyper.validate();
    const int n_tot = m.schema.n_tot();
    for (const auto& n : j.at("layer_norms")) {
      Normalizer<double> norm{json_vec(n.at("means")), json_vec(n.at("stds"))};
      if (norm.means.size() != n_tot || norm.stds.size() != n_tot) throw Error(ErrorKind::kFormat, "layer normalizer width");
      m.layer_norms.push_back(std::move(norm));
    }
    if (static_cast<int>(m.layer_norms.size()) != m.hyper.n_layers) throw Error(ErrorKind::kFormat, "layer normalizer count");
    for (const auto& tj : j.at("trees")) {
      Tree t;
      t.index = tj.at("index").get<int>();
      t.seed = tj.at("seed").get<std::uint64_t>();
      t.features = tj.at("features").get<std::vector<int>>();
      for (int f : t.features)
        if (f < 0 || f >= n_tot) throw Error(ErrorKind::kFormat, "tree feature id out of range");
      const int n_feat = n_squared(static_cast<int>(t.features.size()));
      for (const auto& nj : tj.at("nodes")) t.nodes.push_back(node_from_json(nj, n_feat));
      for (const auto& n : t.nodes)
        for (int c : n.children)
          if (c >= static_cast<int>(t.nodes.size())) throw Error(ErrorKind::kFormat, "child link out of range");
      m.trees.push_back(std::move(t));
    }
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kFormat, std::string("malformed model: ") + e.what());
  }
}

std::string serialize_model(const Model& model) { return model_to_json(model).dump(1) + "\n"; }

Model deserialize_model(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kFormat, std::string("model is not valid JSON: ") + e.what());
  }
  return model_from_json(j);
}

void save_model(const std::filesystem::path& path, const Model& model) { write_file_atomic(path, serialize_model(model)); }

Model load_model(const std::filesystem::path& path) { return deserialize_model(read_file(path)); }

}  // namespace hqrf
