/*
 * Copyright 2026 The relgrpo Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "core/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "core/error.hpp"

namespace relgrpo {

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

EvalReport evaluate(std::span<const Prediction> preds, std::span<const LabelIndex> golds,
                    const LabelInventory& inv) {
  if (preds.size() != golds.size()) {
    throw LengthMismatch(std::to_string(preds.size()) + " predictions for " +
                         std::to_string(golds.size()) + " gold labels");
  }
  const std::size_t n = inv.size();
  const LabelIndex none = inv.none_index();
  EvalReport r;
  for (const auto& l : inv.labels()) r.labels.push_back(l.canonical());
  r.confusion.assign(n, std::vector<std::size_t>(n + 1, 0));
  r.total = golds.size();
  for (std::size_t i = 0; i < golds.size(); ++i) {
    const LabelIndex gold = golds[i];
    if (gold >= n) throw InvalidArgument("gold label index out of range");
    const Prediction& pred = preds[i];
    if (pred && *pred >= n) throw InvalidArgument("predicted label index out of range");
    r.confusion[gold][pred ? *pred : n] += 1;
    if (!pred) ++r.unparsable;
    const bool hit = pred && *pred == gold;
    if (hit) ++r.correct;
    if (pred && *pred != none) ++r.predicted_non_none;
    if (gold != none) ++r.gold_non_none;
    if (hit && gold != none) ++r.correct_non_none;
  }
  r.accuracy = ratio(r.correct, r.total);
  r.precision = ratio(r.correct_non_none, r.predicted_non_none);
  r.recall = ratio(r.correct_non_none, r.gold_non_none);
  r.f1 = r.precision + r.recall > 0.0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
                                      : 0.0;
  return r;
}

Json EvalReport::to_json() const {
  return Json{{"accuracy", accuracy},
              {"precision", precision},
              {"recall", recall},
              {"f1", f1},
              {"counts",
               {{"total", total},
                {"correct", correct},
                {"predicted_non_none", predicted_non_none},
                {"gold_non_none", gold_non_none},
                {"correct_non_none", correct_non_none},
                {"unparsable", unparsable}}},
              {"labels", labels},
              {"confusion", confusion}};
}

std::string EvalReport::to_table() const {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof(line), "%-10s %10s %10s %10s %10s\n", "", "Acc", "P", "R", "F1");
  os << line;
  std::snprintf(line, sizeof(line), "%-10s %10.4f %10.4f %10.4f %10.4f\n", "overall", accuracy,
                precision, recall, f1);
  os << line;
  std::snprintf(line, sizeof(line),
                "total %zu  correct %zu  pred non-none %zu  gold non-none %zu  correct non-none %zu"
                "  unparsable %zu\n",
                total, correct, predicted_non_none, gold_non_none, correct_non_none, unparsable);
  os << line;
  std::size_t width = 5;
  for (const auto& l : labels) width = std::max(width, l.size());
  os << "\n" << std::string(width, ' ') << "  gold  correct  predicted\n";
  for (std::size_t g = 0; g < labels.size(); ++g) {
    std::size_t row = 0, predicted = 0;
    for (std::size_t p = 0; p < confusion[g].size(); ++p) row += confusion[g][p];
    for (std::size_t k = 0; k < labels.size(); ++k) predicted += confusion[k][g];
    os << labels[g] << std::string(width - labels[g].size(), ' ');
    std::snprintf(line, sizeof(line), "  %4zu  %7zu  %9zu\n", row, confusion[g][g], predicted);
    os << line;
  }
  return os.str();
}

std::string EvalReport::confusion_csv() const {
  std::ostringstream os;
  os << "gold\\pred";
  for (const auto& l : labels) os << ',' << l;
  os << ",unparsable\n";
  for (std::size_t g = 0; g < labels.size(); ++g) {
    os << labels[g];
    for (std::size_t c : confusion[g]) os << ',' << c;
    os << '\n';
  }
  return os.str();
}

}  // namespace relgrpo
