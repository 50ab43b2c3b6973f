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
#include <optional>
#include <string>
#include <string_view>

#include "core/relation_schema.hpp"

namespace relgrpo {

inline constexpr int kReasoningSteps = 6;

// Structural view of one response against the template
//   <think> Step 1: .. Step 6: .. </think> <answer>label</answer>
struct ParsedResponse {
  std::string raw;
  std::optional<std::string> think_block;
  std::array<std::string, kReasoningSteps> steps;
  // Present only when structure_ok.
  std::optional<std::string> answer_text;
  bool structure_ok = false;
  // Empty when structure_ok; otherwise the first rule that failed.
  std::string failure;
};

struct RewardBreakdown {
  double format = 0.0;
  double length = 0.0;
  double answer = 0.0;
  double total = 0.0;
};

struct RewardConfig {
  // Characters (UTF-8 code points), strict inequality.
  std::size_t length_threshold = 1024;
  // Accept "per/org/x" for "/per/org/x".
  bool lenient_label = false;
};

// Total and deterministic: never throws, malformed input gives structure_ok = false.
ParsedResponse parse_response(std::string_view raw);

// Number of UTF-8 code points; invalid bytes count as one each.
std::size_t text_length(std::string_view raw);

double format_reward(const ParsedResponse& p, const LabelInventory& inv, bool lenient = false);
double length_reward(std::string_view raw, std::size_t threshold);
double answer_reward(const ParsedResponse& p, const RelationLabel& gold, const LabelInventory& inv,
                     bool lenient = false);

RewardBreakdown composite_reward(std::string_view raw, const RelationLabel& gold,
                                 const LabelInventory& inv, const RewardConfig& cfg);

}  // namespace relgrpo
