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

#include "core/reward.hpp"

#include <algorithm>
#include <cctype>

namespace relgrpo {

namespace {

constexpr std::string_view kThinkOpen = "<think>";
constexpr std::string_view kThinkClose = "</think>";
constexpr std::string_view kAnswerOpen = "<answer>";
constexpr std::string_view kAnswerClose = "</answer>";

std::size_t count_of(std::string_view hay, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string_view::npos;
       pos = hay.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

bool blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

std::string step_marker(int k) { return "Step " + std::to_string(k) + ":"; }

}  // namespace

ParsedResponse parse_response(std::string_view raw) {
  ParsedResponse p;
  p.raw = std::string(raw);
  auto fail = [&p](std::string why) {
    p.failure = std::move(why);
    return p;
  };

  for (auto tag : {kThinkOpen, kThinkClose, kAnswerOpen, kAnswerClose}) {
    const auto n = count_of(raw, tag);
    if (n != 1) {
      return fail(std::string(tag) + (n == 0 ? " missing" : " repeated"));
    }
  }
  const auto think_open = raw.find(kThinkOpen);
  const auto think_close = raw.find(kThinkClose);
  const auto answer_open = raw.find(kAnswerOpen);
  const auto answer_close = raw.find(kAnswerClose);
  if (!(think_open < think_close && think_close < answer_open && answer_open < answer_close)) {
    return fail("blocks out of order");
  }

  const auto think_begin = think_open + kThinkOpen.size();
  const std::string_view interior = raw.substr(think_begin, think_close - think_begin);
  p.think_block = std::string(interior);

  if (!blank(raw.substr(0, think_open))) return fail("text before <think>");
  const auto between_begin = think_close + kThinkClose.size();
  if (!blank(raw.substr(between_begin, answer_open - between_begin))) {
    return fail("text between </think> and <answer>");
  }
  if (!blank(raw.substr(answer_close + kAnswerClose.size()))) return fail("text after </answer>");

  std::array<std::size_t, kReasoningSteps> at{};
  for (int k = 1; k <= kReasoningSteps; ++k) {
    const auto marker = step_marker(k);
    const auto n = count_of(interior, marker);
    if (n != 1) return fail(marker + (n == 0 ? " missing" : " repeated"));
    at[k - 1] = interior.find(marker);
    if (k > 1 && at[k - 1] < at[k - 2]) return fail(marker + " out of order");
  }
  if (!blank(interior.substr(0, at[0]))) return fail("text before Step 1:");
  for (int k = 0; k < kReasoningSteps; ++k) {
    const auto begin = at[k] + step_marker(k + 1).size();
    const auto end = k + 1 < kReasoningSteps ? at[k + 1] : interior.size();
    p.steps[k] = std::string(trim(interior.substr(begin, end - begin)));
  }

  const auto answer_begin = answer_open + kAnswerOpen.size();
  p.answer_text = std::string(trim(raw.substr(answer_begin, answer_close - answer_begin)));
  p.structure_ok = true;
  return p;
}

std::size_t text_length(std::string_view raw) {
  return static_cast<std::size_t>(std::count_if(raw.begin(), raw.end(), [](char c) {
    return (static_cast<unsigned char>(c) & 0xC0) != 0x80;
  }));
}

double format_reward(const ParsedResponse& p, const LabelInventory& inv, bool lenient) {
  if (!p.structure_ok || !p.answer_text) return 0.0;
  return inv.find(*p.answer_text, lenient) ? 1.0 : 0.0;
}

double length_reward(std::string_view raw, std::size_t threshold) {
  return text_length(raw) > threshold ? 1.0 : 0.0;
}

double answer_reward(const ParsedResponse& p, const RelationLabel& gold, const LabelInventory& inv,
                     bool lenient) {
  if (!p.structure_ok || !p.answer_text) return 0.0;
  const auto idx = inv.find(*p.answer_text, lenient);
  return idx && inv.at(*idx) == gold ? 1.0 : 0.0;
}

RewardBreakdown composite_reward(std::string_view raw, const RelationLabel& gold,
                                 const LabelInventory& inv, const RewardConfig& cfg) {
  const ParsedResponse p = parse_response(raw);
  RewardBreakdown r;
  r.format = format_reward(p, inv, cfg.lenient_label);
  r.length = length_reward(raw, cfg.length_threshold);
  r.answer = answer_reward(p, gold, inv, cfg.lenient_label);
  r.total = r.format + r.length + r.answer;
  return r;
}

}  // namespace relgrpo
