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

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "core/jsonl.hpp"
#include "core/relation_schema.hpp"

namespace relgrpo {

// nullopt marks an unparsable model output.
using Prediction = std::optional<LabelIndex>;

// Accuracy over all samples; precision/recall/F1 micro-averaged over the
// non-none labels with none as the negative class. 0/0 is defined as 0.
struct EvalReport {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t total = 0;
  std::size_t correct = 0;
  std::size_t predicted_non_none = 0;
  std::size_t gold_non_none = 0;
  std::size_t correct_non_none = 0;
  std::size_t unparsable = 0;
  std::vector<std::string> labels;
  // confusion[gold][pred]; the last column counts unparsable predictions.
  std::vector<std::vector<std::size_t>> confusion;

  Json to_json() const;
  std::string to_table() const;
  std::string confusion_csv() const;
};

// Throws LengthMismatch when the lists differ in length.
EvalReport evaluate(std::span<const Prediction> preds, std::span<const LabelIndex> golds,
                    const LabelInventory& inv);

}  // namespace relgrpo
