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

// Command implementations behind the hqrf executable.
//
// Manifest (JSON):
//   {"n_classes": 4, "class_names": [...], "background": [1],
//    "volumes": [{"path": "train_0.mrv", "split": "train"}, ...]}
// Class ids in the manifest are 1-based; paths are relative to the manifest.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hqrf/forest.hpp"
#include "hqrf/metrics.hpp"

namespace hqrf {

struct Manifest {
  struct Entry {
    std::filesystem::path path;  // resolved
    std::string split;
  };
  std::filesystem::path file;
  int n_classes = 0;
  std::vector<std::string> class_names;
  std::vector<ClassIndex> background;  // zero-based
  std::vector<Entry> volumes;

  std::vector<std::filesystem::path> split(const std::string& name) const;
  std::vector<ClassIndex> foreground() const;
};

/// BadConfig on missing fields or an unknown split tag; Io when a listed volume is missing.
Manifest load_manifest(const std::filesystem::path& path);

/// Hyperparameters used when none are given: d1 = 4, g_tree = 1e-3 and
/// lambdas 0.18, 0.27, 0.52, 0.38, 0.15 for layers 1..5.
Hyperparams default_hyperparams();

struct SynthOptions {
  std::string preset = "blocks";  // blocks | concentric
  std::filesystem::path out = ".";
  std::uint64_t seed = 1;
  int n_train = 6;
  int n_val = 1;
  int n_test = 2;
  Dims dims{48, 48, 48};
  std::optional<double> noise;
};
void cmd_synth(const SynthOptions& options, std::ostream& log);

struct TrainOptions {
  std::filesystem::path manifest;
  std::filesystem::path model_out = "model.json";
  std::optional<std::filesystem::path> hyper;
  std::optional<std::filesystem::path> grids;
  std::optional<std::uint64_t> seed;
  int threads = 1;
  int max_trials = 200;
};
/// Writes the model, <model>.report.json and, with grids, <model>.trials.jsonl.
nlohmann::json cmd_train(const TrainOptions& options, std::ostream& log);

struct PredictCmdOptions {
  std::filesystem::path manifest;
  std::filesystem::path model;
  std::filesystem::path out = ".";
  std::string split = "test";
  int threads = 1;
  bool batch_normalize = false;
  bool export_voxels = false;
};
/// Per volume: <stem>.pred.mrv (n_classes probability channels, a reliability
/// channel, predicted labels) and <stem>.records.jsonl; plus features.json.
void cmd_predict(const PredictCmdOptions& options, std::ostream& log);

struct EvalOptions {
  std::filesystem::path manifest;
  std::filesystem::path predictions = ".";
  std::optional<std::filesystem::path> out;  // default <predictions>/eval.json
  std::string split = "test";
};
nlohmann::json cmd_eval(const EvalOptions& options, std::ostream& log);

void cmd_inspect(const std::filesystem::path& model, std::ostream& out);

/// Prediction volume layout written by cmd_predict.
LabeledVolume prediction_volume(const Dims& dims, const LayerPrediction& voxels, int n_classes);

nlohmann::json metrics_json(const Confusion& confusion, std::span<const ClassIndex> foreground);

}  // namespace hqrf
