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

// Line-delimited JSON graph records, one per patch and layer, for downstream
// neighbourhood-graph models. Fields:
//   volume, layer, id, origin, priors, label (1-based), reliability,
//   features_specific, features_independent, neighbors, parent, children
// Layer-1 children are the 27 voxel ids (x-fastest voxel indices). Voxel
// records (layer 0) carry the channel intensities as features_specific.
// Index lists and names of both feature sets are in the features sidecar.

#include <ostream>
#include <string>

#include <json.hpp>

#include "hqrf/forest.hpp"

namespace hqrf {

nlohmann::json features_sidecar(const Model& model);

struct RecordOptions {
  std::string volume_name;
  bool voxels = false;
};

/// Returns the number of records written.
std::int64_t write_graph_records(std::ostream& out, const Model& model, const PreparedVolume& volume,
                                 const VolumePrediction& prediction, const RecordOptions& options);

}  // namespace hqrf
