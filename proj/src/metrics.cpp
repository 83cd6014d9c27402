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

#include "hqrf/metrics.hpp"

#include "hqrf/error.hpp"

namespace hqrf {

Confusion confusion_matrix(std::span<const ClassIndex> predicted, std::span<const ClassIndex> reference, int n_classes) {
  if (predicted.size() != reference.size())
    throw Error(ErrorKind::kMisalignment, "predictions and references differ in length");
  Confusion m(static_cast<std::size_t>(n_classes), std::vector<std::int64_t>(static_cast<std::size_t>(n_classes), 0));
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const ClassIndex p = predicted[i], r = reference[i];
    if (p < 0 || p >= n_classes || r < 0 || r >= n_classes)
      throw Error(ErrorKind::kDimensionMismatch, "label outside class universe");
    ++m[static_cast<std::size_t>(r)][static_cast<std::size_t>(p)];
  }
  return m;
}

ClassScore class_score(const Confusion& m, ClassIndex cls) {
  const auto c = static_cast<std::size_t>(cls);
  if (c >= m.size()) throw Error(ErrorKind::kDimensionMismatch, "class outside confusion matrix");
  ClassScore s;
  s.cls = cls;
  s.tp = m[c][c];
  for (std::size_t o = 0; o < m.size(); ++o) {
    if (o == c) continue;
    s.fp += m[o][c];
    s.fn += m[c][o];
  }
  const std::int64_t predicted = s.tp + s.fp, actual = s.tp + s.fn;
  if (predicted == 0 && actual == 0) return s;
  s.precision = predicted == 0 ? 0.0 : static_cast<double>(s.tp) / static_cast<double>(predicted);
  s.recall = actual == 0 ? 1.0 : static_cast<double>(s.tp) / static_cast<double>(actual);
  return s;
}

MacroScore macro_from_confusion(const Confusion& confusion, std::span<const ClassIndex> foreground) {
  if (foreground.empty()) throw Error(ErrorKind::kNoForegroundClasses, "no foreground classes to average");
  MacroScore out;
  for (ClassIndex c : foreground) {
    out.per_class.push_back(class_score(confusion, c));
    out.precision += out.per_class.back().precision;
    out.recall += out.per_class.back().recall;
  }
  out.precision /= static_cast<double>(foreground.size());
  out.recall /= static_cast<double>(foreground.size());
  return out;
}

MacroScore precision_recall_macro(std::span<const ClassIndex> predicted, std::span<const ClassIndex> reference,
                                  std::span<const ClassIndex> foreground, int n_classes) {
  if (foreground.empty()) throw Error(ErrorKind::kNoForegroundClasses, "no foreground classes to average");
  return macro_from_confusion(confusion_matrix(predicted, reference, n_classes), foreground);
}

}  // namespace hqrf
