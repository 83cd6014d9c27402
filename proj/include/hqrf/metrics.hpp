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

// One-vs-rest precision/recall with macro averaging over foreground classes.
// Empty denominators: a class absent from both predictions and references
// scores 1/1; a class never predicted has precision 0 when it is present in
// the references; a class with no references has recall 1.

#include <cstdint>
#include <span>
#include <vector>

#include "hqrf/types.hpp"

namespace hqrf {

using Confusion = std::vector<std::vector<std::int64_t>>;  // [reference][predicted]

/// Misalignment when the spans differ in length; DimensionMismatch on labels outside [0, n_classes).
Confusion confusion_matrix(std::span<const ClassIndex> predicted, std::span<const ClassIndex> reference, int n_classes);

struct ClassScore {
  ClassIndex cls = 0;
  std::int64_t tp = 0, fp = 0, fn = 0;
  double precision = 1.0;
  double recall = 1.0;
};

struct MacroScore {
  double precision = 0.0;
  double recall = 0.0;
  std::vector<ClassScore> per_class;

  double combined() const { return (precision + recall) / 2.0; }
};

ClassScore class_score(const Confusion& confusion, ClassIndex cls);

/// NoForegroundClasses when `foreground` is empty.
MacroScore precision_recall_macro(std::span<const ClassIndex> predicted, std::span<const ClassIndex> reference,
                                  std::span<const ClassIndex> foreground, int n_classes);
MacroScore macro_from_confusion(const Confusion& confusion, std::span<const ClassIndex> foreground);

}  // namespace hqrf
