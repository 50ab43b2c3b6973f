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
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "core/jsonl.hpp"

namespace relgrpo {

enum class EntityType { kPerson, kOrganization, kLocation, kMiscellaneous };

inline constexpr std::array<EntityType, 4> kAllEntityTypes = {
    EntityType::kPerson, EntityType::kOrganization, EntityType::kLocation,
    EntityType::kMiscellaneous};

// Short code: per, org, loc, misc.
std::string_view entity_type_code(EntityType t);

// Case-insensitive on the short code; nullopt otherwise.
std::optional<EntityType> parse_entity_type(std::string_view code);

struct RelationLabel {
  EntityType object_type = EntityType::kPerson;
  EntityType entity_type = EntityType::kPerson;
  std::string semantic;
  bool is_none = false;

  static RelationLabel none() { return RelationLabel{{}, {}, "", true}; }

  // "/<obj>/<ent>/<semantic>" or "none".
  std::string canonical() const;

  bool operator==(const RelationLabel& other) const {
    if (is_none || other.is_none) return is_none == other.is_none;
    return object_type == other.object_type && entity_type == other.entity_type &&
           semantic == other.semantic;
  }
};

using LabelIndex = std::size_t;

// Closed, ordered label set. Immutable once built; safe to share read-only.
class LabelInventory {
 public:
  // The shipped default: labels named in the literature plus placeholders.
  static LabelInventory builtin();

  // One object per line: canonical, object_type, entity_type, semantic.
  static LabelInventory load_jsonl(const std::filesystem::path& path);

  static LabelInventory from_labels(std::vector<RelationLabel> labels, std::string version);

  std::vector<Json> to_jsonl() const;

  std::size_t size() const { return labels_.size(); }
  const std::vector<RelationLabel>& labels() const { return labels_; }
  const RelationLabel& at(LabelIndex i) const { return labels_.at(i); }
  LabelIndex none_index() const { return none_index_; }
  const std::string& version() const { return version_; }

  // Exact canonical match after trimming surrounding whitespace.
  std::optional<LabelIndex> find(std::string_view text) const;

  // As find(), but when lenient is set also accepts the canonical form without
  // its leading slash ("per/org/member_of").
  std::optional<LabelIndex> find(std::string_view text, bool lenient) const;

  // Throws UnknownLabel.
  const RelationLabel& parse(std::string_view text) const;

  LabelIndex index_of(const RelationLabel& label) const;

 private:
  std::vector<RelationLabel> labels_;
  std::unordered_map<std::string, LabelIndex> by_canonical_;
  LabelIndex none_index_ = 0;
  std::string version_;
};

// Throws UnknownLabel when s is not in the inventory.
RelationLabel parse_label(std::string_view s, const LabelInventory& inv);

// Every label whose (object_type, entity_type) matches, plus none, in inventory order.
std::vector<RelationLabel> filter_by_types(EntityType object_type, EntityType entity_type,
                                           const LabelInventory& inv);

std::string_view trim(std::string_view s);

}  // namespace relgrpo
