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

#include "hqrf/records.hpp"

#include "hqrf/error.hpp"

namespace hqrf {

using nlohmann::json;

json features_sidecar(const Model& model) {
  const auto raw = model.schema.names();
  auto named = [&](const std::vector<int>& ids) {
    json a = json::array();
    for (int g : ids) a.push_back({{"index", g}, {"name", squared_feature_name(raw, g)}});
    return a;
  };
  json j;
  j["schema"] = model.schema.id;
  j["raw_features"] = raw;
  json specific = json::object();
  for (int r = 1; r <= model.n_layers(); ++r) specific[std::to_string(r)] = named(consolidate_resolution_specific(model, r));
  j["resolution_specific"] = specific;
  const auto independent = consolidate_resolution_independent(model);
  j["resolution_independent"] = named(independent.indices);
  j["resolution_independent_fallback"] = independent.fallback;
  return j;
}

std::int64_t write_graph_records(std::ostream& out, const Model& model, const PreparedVolume& volume,
                                 const VolumePrediction& prediction, const RecordOptions& options) {
  const auto& pyr = volume.pyramid;
  const int n_lay = model.n_layers();
  if (static_cast<int>(prediction.layers.size()) != n_lay + 1)
    throw Error(ErrorKind::kDimensionMismatch, "prediction does not cover the pyramid");
  const auto independent = consolidate_resolution_independent(model).indices;
  std::int64_t written = 0;

  auto emit = [&](int r, PatchId id, const Int3& origin, const LayerPrediction& lp, json fs, json fi) {
    json rec;
    rec["volume"] = options.volume_name;
    rec["layer"] = r;
    rec["id"] = id;
    rec["origin"] = origin;
    std::vector<double> priors(static_cast<std::size_t>(model.n_classes));
    for (int c = 0; c < model.n_classes; ++c) priors[static_cast<std::size_t>(c)] = lp.probs(id, c);
    rec["priors"] = priors;
    rec["label"] = lp.labels[static_cast<std::size_t>(id)] + 1;
    rec["reliability"] = lp.reliability[id];
    rec["features_specific"] = std::move(fs);
    rec["features_independent"] = std::move(fi);
    rec["neighbors"] = pyr.neighbors(r, id);
    rec["parent"] = pyr.parent(r, id);
    rec["children"] = pyr.children(r, id);
    out << rec.dump() << '\n';
    ++written;
  };

  for (int r = n_lay; r >= 1; --r) {
    const auto& g = pyr.layer(r);
    const auto specific = consolidate_resolution_specific(model, r);
    const MatrixXd norm = model.layer_norms[static_cast<std::size_t>(r - 1)].apply_rows(volume.features[static_cast<std::size_t>(r)]);
    for (PatchId id = 0; id < g.size(); ++id) {
      const VectorXd f = norm.row(id).transpose();
      std::vector<double> fs, fi;
      for (int k : specific) fs.push_back(squared_feature_value(f, k));
      for (int k : independent) fi.push_back(squared_feature_value(f, k));
      emit(r, id, g.origin(id), prediction.layers[static_cast<std::size_t>(r)], fs, fi);
    }
  }
  if (options.voxels) {
    if (prediction.layers[0].labels.empty()) throw Error(ErrorKind::kDimensionMismatch, "voxel predictions missing");
    const auto& dims = pyr.dims();
    for (int z = 0; z < dims.z; ++z)
      for (int y = 0; y < dims.y; ++y)
        for (int x = 0; x < dims.x; ++x) {
          const VectorXd f = voxel_features(*volume.volume, x, y, z);
          emit(0, dims.index(x, y, z), {x, y, z}, prediction.layers[0], std::vector<double>(f.data(), f.data() + f.size()),
               json::array());
        }
  }
  return written;
}

}  // namespace hqrf
