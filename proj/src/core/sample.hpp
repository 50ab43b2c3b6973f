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

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "core/jsonl.hpp"
#include "core/policy.hpp"
#include "core/relation_schema.hpp"

namespace relgrpo {

// One object-entity relation instance.
struct Sample {
  std::string sample_id;
  std::string text;
  std::string entity;
  std::pair<int, int> entity_span{0, 0};
  std::optional<std::string> image_path;
  std::optional<std::array<double, 4>> object_bbox;
  // Encoded input; present for synthetic data.
  std::vector<double> features;
  std::string gold_label;
  // "easy" / "hard" as generated; absent for real data.
  std::optional<std::string> difficulty;

  Json to_json() const;
  static Sample from_json(const Json& j);
};

std::vector<Sample> load_samples(const std::filesystem::path& path);
void save_samples(const std::filesystem::path& path, const std::vector<Sample>& samples);

// Throws UnknownLabel when the gold label is not in the inventory and
// InvalidArgument when the sample carries no features.
Query to_query(const Sample& s, const LabelInventory& inv);

}  // namespace relgrpo
