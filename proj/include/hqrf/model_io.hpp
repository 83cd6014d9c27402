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

// Versioned JSON model files. Doubles are written with round-trip precision
// and no wall-clock data is stored, so equal models give equal bytes.

#include <filesystem>
#include <string>

#include <json.hpp>

#include "hqrf/forest.hpp"

namespace hqrf {

inline constexpr int kModelFormatVersion = 1;

nlohmann::json hyperparams_to_json(const Hyperparams& h);
Hyperparams hyperparams_from_json(const nlohmann::json& j);

nlohmann::json model_to_json(const Model& model);
/// Format on unknown versions or malformed content; UnknownSchema on an unknown feature schema.
Model model_from_json(const nlohmann::json& j);

std::string serialize_model(const Model& model);
Model deserialize_model(const std::string& text);

void save_model(const std::filesystem::path& path, const Model& model);
Model load_model(const std::filesystem::path& path);

}  // namespace hqrf
