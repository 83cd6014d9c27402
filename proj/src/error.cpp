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

#include "hqrf/error.hpp"

namespace hqrf {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kEmptyClass: return "EmptyClass";
    case ErrorKind::kInsufficientSamples: return "InsufficientSamples";
    case ErrorKind::kEmptySet: return "EmptySet";
    case ErrorKind::kZeroDiagonal: return "ZeroDiagonal";
    case ErrorKind::kSingularCovariance: return "SingularCovariance";
    case ErrorKind::kDimensionMismatch: return "DimensionMismatch";
    case ErrorKind::kVolumeTooSmall: return "VolumeTooSmall";
    case ErrorKind::kNoCells: return "NoCells";
    case ErrorKind::kTooManyTrees: return "TooManyTrees";
    case ErrorKind::kSingleClass: return "SingleClass";
    case ErrorKind::kUnknownSchema: return "UnknownSchema";
    case ErrorKind::kBadConfig: return "BadConfig";
    case ErrorKind::kIo: return "Io";
    case ErrorKind::kFormat: return "Format";
    case ErrorKind::kMisalignment: return "Misalignment";
    case ErrorKind::kNoForegroundClasses: return "NoForegroundClasses";
  }
  return "Unknown";
}

}  // namespace hqrf
