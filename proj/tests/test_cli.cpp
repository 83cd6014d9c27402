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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "hqrf/commands.hpp"
#include "hqrf/error.hpp"
#include "hqrf/model_io.hpp"
#include "hqrf/synth.hpp"
#include "hqrf/volume.hpp"

using namespace hqrf;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream f(p);
  f << s;
}

std::vector<json> read_jsonl(const fs::path& p) {
  std::vector<json> out;
  std::istringstream in(read_file(p));
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) out.push_back(json::parse(line));
  return out;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::kIo;
}

}  // namespace

TEST_CASE("synth is deterministic") {
  TempDir a("hqrf_cli_synth_a"), b("hqrf_cli_synth_b");
  std::ostringstream log;
  SynthOptions o;
  o.dims = {12, 12, 12};
  o.n_train = 2;
  o.n_val = 0;
  o.n_test = 1;
  o.seed = 9;
  o.out = a.path;
  cmd_synth(o, log);
  o.out = b.path;
  cmd_synth(o, log);
  for (const char* name : {"train_0.mrv", "train_1.mrv", "test_0.mrv"})
    CHECK(read_file(a.path / name) == read_file(b.path / name));
  CHECK(read_file(a.path / "train_0.mrv") != read_file(a.path / "train_1.mrv"));
  const Manifest m = load_manifest(a.path / "manifest.json");
  CHECK(m.n_classes == kBlocksClasses);
  CHECK(m.background == std::vector<ClassIndex>{0});
  CHECK(m.foreground() == std::vector<ClassIndex>{1, 2, 3});
  CHECK(m.split("train").size() == 2);
  CHECK(m.split("val").empty());

  o.preset = "other";
  CHECK(kind_of([&] { cmd_synth(o, log); }) == ErrorKind::kBadConfig);
}

TEST_CASE("noise-free concentric volumes follow the radial rule") {
  TempDir d("hqrf_cli_conc");
  std::ostringstream log;
  SynthOptions o;
  o.preset = "concentric";
  o.dims = {13, 12, 11};
  o.n_train = 1;
  o.n_val = 0;
  o.n_test = 0;
  o.noise = 0.0;
  o.out = d.path;
  cmd_synth(o, log);
  const auto v = read_mrv(d.path / "train_0.mrv");
  ConcentricConfig cfg;
  cfg.dims = o.dims;
  cfg.radii = {0.7 * 5.5, 0.35 * 5.5};
  std::set<ClassIndex> seen;
  for (int k = 0; k < 11; ++k)
    for (int j = 0; j < 12; ++j)
      for (int i = 0; i < 13; ++i) {
        CHECK(v.label(i, j, k) == concentric_label(cfg, i, j, k));
        seen.insert(v.label(i, j, k));
      }
  CHECK(seen.size() == 3);
}

TEST_CASE("manifest validation") {
  TempDir d("hqrf_cli_manifest");
  LabeledVolume v;
  v.dims = {3, 3, 3};
  v.channels.assign(1, std::vector<float>(27, 0.0f));
  v.labels.assign(27, 0);
  write_mrv(d.path / "a.mrv", v);
  const auto m = d.path / "m.json";
  write_text(m, R"({"n_classes": 2, "background": [2], "volumes": [{"path": "a.mrv", "split": "test"}]})");
  const Manifest ok = load_manifest(m);
  CHECK(ok.background == std::vector<ClassIndex>{1});
  CHECK(ok.class_names.size() == 2);
  CHECK(ok.split("test").front() == d.path / "a.mrv");

  write_text(m, R"({"n_classes": 2, "volumes": [{"path": "a.mrv", "split": "holdout"}]})");
  CHECK(kind_of([&] { load_manifest(m); }) == ErrorKind::kBadConfig);
  write_text(m, R"({"n_classes": 2, "volumes": [{"path": "b.mrv", "split": "test"}]})");
  CHECK(kind_of([&] { load_manifest(m); }) == ErrorKind::kIo);
  write_text(m, R"({"n_classes": 2, "background": [3], "volumes": []})");
  CHECK(kind_of([&] { load_manifest(m); }) == ErrorKind::kBadConfig);
  write_text(m, R"({"volumes": []})");
  CHECK(kind_of([&] { load_manifest(m); }) == ErrorKind::kBadConfig);
  write_text(m, "{not json");
  CHECK(kind_of([&] { load_manifest(m); }) == ErrorKind::kBadConfig);
  CHECK(kind_of([&] { load_manifest(d.path / "none.json"); }) == ErrorKind::kIo);
}

TEST_CASE("train, predict, eval and inspect end to end") {
  TempDir d("hqrf_cli_e2e");
  std::ostringstream log;
  SynthOptions so;
  so.dims = {24, 24, 24};
  so.n_train = 2;
  so.n_val = 1;
  so.n_test = 1;
  so.noise = 4.0;
  so.out = d.path;
  cmd_synth(so, log);
  const auto manifest = d.path / "manifest.json";
  const std::string test_before = read_file(d.path / "test_0.mrv");

  write_text(d.path / "hyper.json", R"({"n_layers": 3, "d1": 2, "g_tree": 0.001, "lambdas": [0.2, 0.2, 0.2], "seed": 4})");
  TrainOptions to;
  to.manifest = manifest;
  to.model_out = d.path / "model.json";
  to.hyper = d.path / "hyper.json";
  const json rep = cmd_train(to, log);
  CHECK(rep.at("n_trees") == 5);
  CHECK(rep.at("degenerate") == false);
  for (const char* k : {"pyramid", "features", "smote", "tree_optimization"})
    CHECK(rep.at("timings_seconds").at(k).get<double>() >= 0.0);
  CHECK(fs::exists(d.path / "model.json.report.json"));
  const Model model = load_model(d.path / "model.json");
  CHECK(model.class_names == std::vector<std::string>{"background", "block_a", "block_b", "block_c"});

  PredictCmdOptions po;
  po.manifest = manifest;
  po.model = d.path / "model.json";
  po.out = d.path / "pred";
  po.export_voxels = true;
  cmd_predict(po, log);
  CHECK(read_file(d.path / "test_0.mrv") == test_before);

  const auto pred = read_mrv(d.path / "pred" / "test_0.pred.mrv");
  CHECK(pred.n_channels() == kBlocksClasses + 1);
  CHECK(pred.dims == so.dims);
  for (std::size_t i = 0; i < pred.labels.size(); i += 97) {
    double s = 0.0;
    for (int c = 0; c < kBlocksClasses; ++c) s += pred.channels[static_cast<std::size_t>(c)][i];
    CHECK(s == doctest::Approx(1.0).epsilon(1e-5));
  }

  const auto side = json::parse(read_file(d.path / "pred" / "features.json"));
  CHECK(side.contains("resolution_independent"));

  const auto records = read_jsonl(d.path / "pred" / "test_0.records.jsonl");
  const Pyramid pyr(so.dims, 3);
  std::map<int, std::int64_t> per_layer;
  for (const auto& r : records) {
    const int layer = r.at("layer").get<int>();
    ++per_layer[layer];
    double s = 0.0;
    for (double p : r.at("priors")) s += p;
    CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
    const int label = r.at("label").get<int>();
    CHECK(label >= 1);
    CHECK(label <= kBlocksClasses);
    if (layer >= 1) {
      const auto n_here = pyr.layer(layer).size();
      for (auto q : r.at("neighbors")) {
        CHECK(q.get<std::int64_t>() >= 0);
        CHECK(q.get<std::int64_t>() < n_here);
      }
      if (layer == 1) CHECK(r.at("children").size() == 27);
      if (layer < 3) CHECK(r.at("parent").get<std::int64_t>() >= 0);
    }
  }
  for (int r = 1; r <= 3; ++r) CHECK(per_layer[r] == pyr.layer(r).size());
  CHECK(per_layer[0] == so.dims.count());

  EvalOptions eo;
  eo.manifest = manifest;
  eo.predictions = d.path / "pred";
  const json ev = cmd_eval(eo, log);
  CHECK(fs::exists(d.path / "pred" / "eval.json"));
  CHECK(ev.at("foreground") == json({2, 3, 4}));
  // recompute the voxel layer from the files
  const auto ref = read_mrv(d.path / "test_0.mrv");
  Confusion c(4, std::vector<std::int64_t>(4, 0));
  for (std::size_t i = 0; i < ref.labels.size(); ++i)
    ++c[static_cast<std::size_t>(ref.labels[i])][static_cast<std::size_t>(pred.labels[i])];
  const auto macro = macro_from_confusion(c, std::vector<ClassIndex>{1, 2, 3});
  CHECK(ev.at("layers").at("0").at("macro_precision").get<double>() == macro.precision);
  CHECK(ev.at("layers").at("0").at("macro_recall").get<double>() == macro.recall);
  CHECK(ev.at("layers").contains("3"));
  CHECK(macro.precision > 0.6);
  CHECK(macro.recall > 0.6);

  // scoring the reference against itself is perfect
  fs::create_directories(d.path / "self");
  LabeledVolume self = ref;
  write_mrv(d.path / "self" / "test_0.pred.mrv", self);
  EvalOptions so2 = eo;
  so2.predictions = d.path / "self";
  const json perfect = cmd_eval(so2, log);
  CHECK(perfect.at("layers").at("0").at("macro_precision") == 1.0);
  CHECK(perfect.at("layers").at("0").at("macro_recall") == 1.0);

  // a prediction grid of the wrong size is rejected
  self.dims = {24, 24, 12};
  self.channels[0].resize(24 * 24 * 12);
  self.channels[1].resize(24 * 24 * 12);
  self.labels.resize(24 * 24 * 12);
  write_mrv(d.path / "self" / "test_0.pred.mrv", self);
  CHECK(kind_of([&] { cmd_eval(so2, log); }) == ErrorKind::kMisalignment);

  std::ostringstream ins;
  cmd_inspect(d.path / "model.json", ins);
  const std::string text = ins.str();
  for (const char* needle : {"tree 5", "layer 3", "leaf", "decision", "thresholds:", "probs:", "accuracy:",
                             "difficulty:", "resolution-specific layer 1", "resolution-independent"})
    CHECK(text.find(needle) != std::string::npos);
  // every leaf reports zero difficulty
  std::istringstream lines(text);
  bool in_leaf = false;
  for (std::string line; std::getline(lines, line);) {
    if (line.find("  node ") == 0) in_leaf = line.find(" leaf") != std::string::npos;
    if (in_leaf && line.find("difficulty:") != std::string::npos) CHECK(line.find("0.0000") != std::string::npos);
  }

  // model / data disagreement
  write_text(d.path / "m3.json", R"({"n_classes": 3, "volumes": [{"path": "test_0.mrv", "split": "test"}]})");
  po.manifest = d.path / "m3.json";
  CHECK(kind_of([&] { cmd_predict(po, log); }) == ErrorKind::kUnknownSchema);
}

TEST_CASE("command-line front end") {
  TempDir d("hqrf_cli_bin");
  const std::string bin = HQRF_CLI_PATH;
  const auto run = [&](const std::string& args) {
    const std::string cmd = "\"" + bin + "\" " + args + " > \"" + (d.path / "out.txt").string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    return status;
  };
  CHECK(run("--help") == 0);
  CHECK(run("train --manifest \"" + (d.path / "missing.json").string() + "\"") != 0);
  write_text(d.path / "bad.json", "{not json");
  CHECK(run("train --manifest \"" + (d.path / "bad.json").string() + "\"") != 0);
  CHECK(read_file(d.path / "out.txt").find("hqrf:") != std::string::npos);
  CHECK(run("synth --out \"" + (d.path / "s").string() + "\" --dims 6 6 6 --train 1 --val 0 --test 0") == 0);
  CHECK(fs::exists(d.path / "s" / "manifest.json"));
  CHECK(run("frobnicate") != 0);
}
