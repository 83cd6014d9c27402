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

// hqrf: synth | train | predict | eval | inspect

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "hqrf/commands.hpp"
#include "hqrf/error.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical quadratic random forest for multichannel volumes"};
  app.require_subcommand(1);

  hqrf::SynthOptions synth;
  std::vector<int> synth_dims;
  double synth_noise = -1.0;
  auto* s = app.add_subcommand("synth", "write synthetic labelled volumes and a manifest");
  s->add_option("--preset", synth.preset, "blocks | concentric")->check(CLI::IsMember({"blocks", "concentric"}));
  s->add_option("--out", synth.out, "output directory")->required();
  s->add_option("--seed", synth.seed);
  s->add_option("--train", synth.n_train, "number of train volumes");
  s->add_option("--val", synth.n_val, "number of val volumes");
  s->add_option("--test", synth.n_test, "number of test volumes");
  s->add_option("--dims", synth_dims, "x y z")->expected(3);
  s->add_option("--noise", synth_noise, "gaussian noise sd");

  hqrf::TrainOptions train;
  std::string train_hyper, train_grids;
  std::uint64_t train_seed = 0;
  auto* t = app.add_subcommand("train", "train a forest, or search hyperparameters when --grids is given");
  t->add_option("--manifest", train.manifest)->required()->check(CLI::ExistingFile);
  t->add_option("--model", train.model_out, "output model file");
  auto* hyper_opt = t->add_option("--hyper", train_hyper, "hyperparameter JSON")->check(CLI::ExistingFile);
  t->add_option("--grids", train_grids, "search grid JSON")->check(CLI::ExistingFile)->excludes(hyper_opt);
  auto* seed_opt = t->add_option("--seed", train_seed);
  t->add_option("--threads", train.threads)->check(CLI::PositiveNumber);
  t->add_option("--max-trials", train.max_trials)->check(CLI::PositiveNumber);

  hqrf::PredictCmdOptions predict;
  auto* p = app.add_subcommand("predict", "predict volumes and export graph records");
  p->add_option("--manifest", predict.manifest)->required()->check(CLI::ExistingFile);
  p->add_option("--model", predict.model)->required()->check(CLI::ExistingFile);
  p->add_option("--out", predict.out, "output directory");
  p->add_option("--split", predict.split)->check(CLI::IsMember({"train", "val", "test"}));
  p->add_option("--threads", predict.threads)->check(CLI::PositiveNumber);
  p->add_flag("--batch-normalize", predict.batch_normalize, "standardize features over the predicted volume");
  p->add_flag("--export-voxels", predict.export_voxels, "also write voxel records");

  hqrf::EvalOptions eval;
  std::string eval_out;
  auto* e = app.add_subcommand("eval", "precision and recall per layer");
  e->add_option("--manifest", eval.manifest)->required()->check(CLI::ExistingFile);
  e->add_option("--pred", eval.predictions, "directory written by predict")->required()->check(CLI::ExistingDirectory);
  e->add_option("--out", eval_out, "report file (default <pred>/eval.json)");
  e->add_option("--split", eval.split)->check(CLI::IsMember({"train", "val", "test"}));

  std::string inspect_model;
  auto* i = app.add_subcommand("inspect", "print node parameters and consolidated feature sets");
  i->add_option("--model", inspect_model)->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (s->parsed()) {
      if (!synth_dims.empty()) synth.dims = {synth_dims[0], synth_dims[1], synth_dims[2]};
      if (synth_noise >= 0.0) synth.noise = synth_noise;
      hqrf::cmd_synth(synth, std::cerr);
    } else if (t->parsed()) {
      if (!train_hyper.empty()) train.hyper = train_hyper;
      if (!train_grids.empty()) train.grids = train_grids;
      if (seed_opt->count() > 0) train.seed = train_seed;
      const auto report = hqrf::cmd_train(train, std::cerr);
      std::cout << report.dump(2) << "\n";
    } else if (p->parsed()) {
      hqrf::cmd_predict(predict, std::cerr);
    } else if (e->parsed()) {
      if (!eval_out.empty()) eval.out = eval_out;
      const auto report = hqrf::cmd_eval(eval, std::cerr);
      std::cout << report.dump(2) << "\n";
    } else if (i->parsed()) {
      hqrf::cmd_inspect(inspect_model, std::cout);
    }
  } catch (const hqrf::Error& err) {
    std::cerr << "hqrf: " << err.what() << "\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "hqrf: " << err.what() << "\n";
    return 1;
  }
  return 0;
}
