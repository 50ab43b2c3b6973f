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

#include "core/sample.hpp"

#include "core/error.hpp"

namespace relgrpo {

Json Sample::to_json() const {
  Json j;
  j["sample_id"] = sample_id;
  j["text"] = text;
  j["entity"] = entity;
  j["entity_span"] = {entity_span.first, entity_span.second};
  if (image_path) j["image_path"] = *image_path;
  if (object_bbox) j["object_bbox"] = *object_bbox;
  if (!features.empty()) j["features"] = features;
  j["gold_label"] = gold_label;
  if (difficulty) j["difficulty"] = *difficulty;
  return j;
}

Sample Sample::from_json(const Json& j) {
  try {
    Sample s;
    s.sample_id = j.at("sample_id").get<std::string>();
    s.text = j.value("text", "");
    s.entity = j.value("entity", "");
    if (j.contains("entity_span")) {
      const auto span = j.at("entity_span").get<std::vector<int>>();
      if (span.size() != 2) throw ParseError("entity_span must have two entries");
      s.entity_span = {span[0], span[1]};
    }
    if (j.contains("image_path") && !j["image_path"].is_null()) {
      s.image_path = j["image_path"].get<std::string>();
    }
    if (j.contains("object_bbox") && !j["object_bbox"].is_null()) {
      s.object_bbox = j["object_bbox"].get<std::array<double, 4>>();
    }
    if (j.contains("features")) s.features = j["features"].get<std::vector<double>>();
    s.gold_label = j.at("gold_label").get<std::string>();
    if (j.contains("difficulty") && !j["difficulty"].is_null()) {
      s.difficulty = j["difficulty"].get<std::string>();
    }
    return s;
  } catch (const Json::exception& e) {
    throw ParseError(std::string("malformed sample: ") + e.what());
  }
}

std::vector<Sample> load_samples(const std::filesystem::path& path) {
  std::vector<Sample> out;
  for (const auto& row : read_jsonl(path)) out.push_back(Sample::from_json(row));
  return out;
}

void save_samples(const std::filesystem::path& path, const std::vector<Sample>& samples) {
  std::vector<Json> rows;
  rows.reserve(samples.size());
  for (const auto& s : samples) rows.push_back(s.to_json());
  write_jsonl(path, rows);
}

Query to_query(const Sample& s, const LabelInventory& inv) {
  if (s.features.empty()) {
    throw InvalidArgument("sample " + s.sample_id + " has no feature vector");
  }
  const auto gold = inv.find(s.gold_label);
  if (!gold) throw UnknownLabel("sample " + s.sample_id + ": unknown gold label " + s.gold_label);
  return Query{s.sample_id, s.features, *gold};
}

}  // namespace relgrpo
