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

#include "core/relation_schema.hpp"

#include <algorithm>
#include <cctype>

#include "core/error.hpp"

namespace relgrpo {

namespace {

struct LabelSeed {
  EntityType object_type;
  EntityType entity_type;
  const char* semantic;
};

using E = EntityType;

// Labels with names attested in the literature come first; the rest are
// placeholders that bring the inventory to 21 entries.
constexpr LabelSeed kBuiltinLabels[] = {
    {E::kPerson, E::kOrganization, "opposed_to"},
    {E::kPerson, E::kOrganization, "leader_of"},
    {E::kPerson, E::kOrganization, "member_of"},
    {E::kPerson, E::kPerson, "peer"},
    {E::kPerson, E::kPerson, "couple"},
    {E::kPerson, E::kPerson, "placeholder_01"},
    {E::kPerson, E::kLocation, "placeholder_02"},
    {E::kPerson, E::kLocation, "placeholder_03"},
    {E::kPerson, E::kMiscellaneous, "placeholder_04"},
    {E::kOrganization, E::kPerson, "placeholder_05"},
    {E::kOrganization, E::kOrganization, "placeholder_06"},
    {E::kOrganization, E::kLocation, "placeholder_07"},
    {E::kOrganization, E::kMiscellaneous, "placeholder_08"},
    {E::kLocation, E::kPerson, "placeholder_09"},
    {E::kLocation, E::kOrganization, "placeholder_10"},
    {E::kLocation, E::kLocation, "placeholder_11"},
    {E::kLocation, E::kMiscellaneous, "placeholder_12"},
    {E::kMiscellaneous, E::kPerson, "placeholder_13"},
    {E::kMiscellaneous, E::kLocation, "placeholder_14"},
    {E::kMiscellaneous, E::kMiscellaneous, "placeholder_15"},
};

bool valid_semantic(std::string_view s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return c != '/' && !std::isspace(c) && c >= 0x20;
  });
}

}  // namespace

std::string_view trim(std::string_view s) {
  const auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string_view entity_type_code(EntityType t) {
  switch (t) {
    case EntityType::kPerson: return "per";
    case EntityType::kOrganization: return "org";
    case EntityType::kLocation: return "loc";
    case EntityType::kMiscellaneous: return "misc";
  }
  return "?";
}

std::optional<EntityType> parse_entity_type(std::string_view code) {
  std::string lower(code);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (EntityType t : kAllEntityTypes) {
    if (lower == entity_type_code(t)) return t;
  }
  return std::nullopt;
}

std::string RelationLabel::canonical() const {
  if (is_none) return "none";
  std::string out = "/";
  out += entity_type_code(object_type);
  out += '/';
  out += entity_type_code(entity_type);
  out += '/';
  out += semantic;
  return out;
}

LabelInventory LabelInventory::builtin() {
  std::vector<RelationLabel> labels;
  for (const auto& seed : kBuiltinLabels) {
    labels.push_back(RelationLabel{seed.object_type, seed.entity_type, seed.semantic, false});
  }
  labels.push_back(RelationLabel::none());
  return from_labels(std::move(labels), "builtin-partial-1");
}

LabelInventory LabelInventory::from_labels(std::vector<RelationLabel> labels, std::string version) {
  LabelInventory inv;
  inv.version_ = std::move(version);
  bool have_none = false;
  for (auto& label : labels) {
    if (!label.is_none && !valid_semantic(label.semantic)) {
      throw ParseError("invalid relation name '" + label.semantic + "'");
    }
    const std::string key = label.canonical();
    if (!inv.by_canonical_.emplace(key, inv.labels_.size()).second) {
      throw ParseError("duplicate label " + key);
    }
    if (label.is_none) {
      have_none = true;
      inv.none_index_ = inv.labels_.size();
      label = RelationLabel::none();
    }
    inv.labels_.push_back(std::move(label));
  }
  if (!have_none) throw ParseError("label inventory must contain none");
  return inv;
}

LabelInventory LabelInventory::load_jsonl(const std::filesystem::path& path) {
  std::vector<RelationLabel> labels;
  std::size_t row_no = 0;
  for (const Json& row : read_jsonl(path)) {
    ++row_no;
    const auto where = path.string() + " row " + std::to_string(row_no);
    if (!row.contains("canonical") || !row["canonical"].is_string()) {
      throw ParseError(where + ": missing 'canonical'");
    }
    const std::string canonical = row["canonical"].get<std::string>();
    if (canonical == "none") {
      labels.push_back(RelationLabel::none());
      continue;
    }
    auto field = [&](const char* name) -> std::string {
      if (!row.contains(name) || !row[name].is_string()) {
        throw ParseError(where + ": missing '" + name + "'");
      }
      return row[name].get<std::string>();
    };
    const auto obj = parse_entity_type(field("object_type"));
    const auto ent = parse_entity_type(field("entity_type"));
    if (!obj || !ent) throw ParseError(where + ": unknown entity type");
    RelationLabel label{*obj, *ent, field("semantic"), false};
    if (label.canonical() != canonical) {
      throw ParseError(where + ": canonical '" + canonical + "' disagrees with fields ('" +
                       label.canonical() + "')");
    }
    labels.push_back(std::move(label));
  }
  std::string version = path.filename().string();
  return from_labels(std::move(labels), version);
}

std::vector<Json> LabelInventory::to_jsonl() const {
  std::vector<Json> rows;
  for (const auto& label : labels_) {
    Json row;
    row["canonical"] = label.canonical();
    if (label.is_none) {
      row["object_type"] = nullptr;
      row["entity_type"] = nullptr;
      row["semantic"] = "none";
    } else {
      row["object_type"] = std::string(entity_type_code(label.object_type));
      row["entity_type"] = std::string(entity_type_code(label.entity_type));
      row["semantic"] = label.semantic;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::optional<LabelIndex> LabelInventory::find(std::string_view text) const {
  return find(text, false);
}

std::optional<LabelIndex> LabelInventory::find(std::string_view text, bool lenient) const {
  const std::string key(trim(text));
  if (auto it = by_canonical_.find(key); it != by_canonical_.end()) return it->second;
  if (lenient && !key.empty() && key.front() != '/' && key != "none") {
    if (auto it = by_canonical_.find("/" + key); it != by_canonical_.end()) return it->second;
  }
  return std::nullopt;
}

const RelationLabel& LabelInventory::parse(std::string_view text) const {
  if (auto idx = find(text)) return labels_[*idx];
  throw UnknownLabel("label '" + std::string(text) + "' is not in inventory " + version_);
}

LabelIndex LabelInventory::index_of(const RelationLabel& label) const {
  if (auto idx = find(label.canonical())) return *idx;
  throw UnknownLabel("label '" + label.canonical() + "' is not in inventory " + version_);
}

RelationLabel parse_label(std::string_view s, const LabelInventory& inv) { return inv.parse(s); }

std::vector<RelationLabel> filter_by_types(EntityType object_type, EntityType entity_type,
                                           const LabelInventory& inv) {
  std::vector<RelationLabel> out;
  for (const auto& label : inv.labels()) {
    if (label.is_none ||
        (label.object_type == object_type && label.entity_type == entity_type)) {
      out.push_back(label);
    }
  }
  return out;
}

}  // namespace relgrpo
