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

#include <string>
#include <vector>

#include "core/rng.hpp"

// Reward parser vectors shared by the unit tests and the acceptance run.
namespace relgrpo::testing {

inline std::string think(const std::vector<std::string>& markers) {
  const char* contents[] = {"a", "b", "c", "d", "e", "f", "g", "h"};
  std::string s = "<think>";
  for (std::size_t i = 0; i < markers.size(); ++i) s += " " + markers[i] + " " + contents[i % 8];
  return s + " </think>";
}

inline const std::vector<std::string> kSteps = {"Step 1:", "Step 2:", "Step 3:",
                                         "Step 4:", "Step 5:", "Step 6:"};

inline std::string well_formed(const std::string& answer) {
  return think(kSteps) + " <answer>" + answer + "</answer>";
}

inline std::vector<std::string> without(std::size_t i) {
  auto v = kSteps;
  v.erase(v.begin() + static_cast<long>(i));
  return v;
}

struct Golden {
  std::string name;
  std::string raw;
  std::string gold;
  std::size_t threshold;
  double format;
  double length;
  double answer;
  bool lenient = false;
};

inline std::vector<Golden> golden_vectors() {
  const std::string opp = "/per/org/opposed_to";
  std::vector<Golden> g = {
      {"minimal_none", well_formed("none"), "none", 1024, 1, 0, 1},
      {"minimal_none_long", well_formed("none"), "none", 8, 1, 1, 1},
      {"relation_correct", well_formed(opp), opp, 1024, 1, 0, 1},
      {"relation_correct_long", well_formed(opp), opp, 8, 1, 1, 1},
      {"none_for_relation_gold", well_formed("none"), opp, 1024, 1, 0, 0},
      {"wrong_relation", well_formed("/per/org/leader_of"), opp, 1024, 1, 0, 0},
      {"label_outside_inventory", well_formed("/per/org/teammate_of"), opp, 1024, 0, 0, 0},
      {"label_wrong_case", well_formed("None"), "none", 1024, 0, 0, 0},
      {"label_without_slash_strict", well_formed("per/org/opposed_to"), opp, 1024, 0, 0, 0},
      {"label_without_slash_lenient", well_formed("per/org/opposed_to"), opp, 1024, 1, 0, 1, true},
      {"empty_answer", well_formed(""), "none", 1024, 0, 0, 0},
      {"answer_padded", think(kSteps) + " <answer> \n none\t</answer>", "none", 1024, 1, 0, 1},
      {"newlines_between_blocks", think(kSteps) + "\n\n<answer>none</answer>\n", "none", 1024, 1, 0,
       1},
      {"no_space_steps",
       "<think>Step 1:Step 2:Step 3:Step 4:Step 5:Step 6:</think><answer>none</answer>", "none",
       1024, 1, 0, 1},
      {"step7_inside_content", think({"Step 1:", "Step 2:", "Step 3:", "Step 4:", "Step 5:",
                                      "Step 6: x Step 7:"}) +
                                   "<answer>none</answer>",
       "none", 1024, 1, 0, 1},
      {"step10_inside_content", think({"Step 1:", "Step 2:", "Step 3:", "Step 4:", "Step 5:",
                                       "Step 6: Step 10:"}) +
                                    "<answer>none</answer>",
       "none", 1024, 1, 0, 1},
      {"reordered_steps_2_3",
       think({"Step 1:", "Step 3:", "Step 2:", "Step 4:", "Step 5:", "Step 6:"}) +
           "<answer>none</answer>",
       "none", 1024, 0, 0, 0},
      {"reordered_steps_6_1",
       think({"Step 6:", "Step 2:", "Step 3:", "Step 4:", "Step 5:", "Step 1:"}) +
           "<answer>none</answer>",
       "none", 1024, 0, 0, 0},
      {"duplicate_step_4",
       think({"Step 1:", "Step 2:", "Step 3:", "Step 4:", "Step 4:", "Step 5:", "Step 6:"}) +
           "<answer>none</answer>",
       "none", 1024, 0, 0, 0},
      {"duplicate_think_block", think(kSteps) + think(kSteps) + "<answer>none</answer>", "none",
       1024, 0, 0, 0},
      {"duplicate_answer_block", well_formed("none") + "<answer>none</answer>", "none", 1024, 0, 0,
       0},
      {"missing_think_open", well_formed("none").substr(7), "none", 1024, 0, 0, 0},
      {"missing_think_close", "<think> Step 1: a Step 2: b Step 3: c Step 4: d Step 5: e Step 6: f "
                              "<answer>none</answer>",
       "none", 1024, 0, 0, 0},
      {"missing_answer_open", think(kSteps) + " none</answer>", "none", 1024, 0, 0, 0},
      {"missing_answer_close", think(kSteps) + " <answer>none", "none", 1024, 0, 0, 0},
      {"answer_before_think", "<answer>none</answer>" + think(kSteps), "none", 1024, 0, 0, 0},
      {"text_after_answer", well_formed("none") + " thanks", "none", 1024, 0, 0, 0},
      {"text_before_think", "Sure. " + well_formed("none"), "none", 1024, 0, 0, 0},
      {"text_between_blocks", think(kSteps) + " so <answer>none</answer>", "none", 1024, 0, 0, 0},
      {"text_before_step1", "<think> hmm Step 1: a Step 2: b Step 3: c Step 4: d Step 5: e "
                            "Step 6: f </think><answer>none</answer>",
       "none", 1024, 0, 0, 0},
      {"think_tag_inside_answer", think(kSteps) + "<answer><think>none</answer>", "none", 1024, 0, 0,
       0},
      {"broken_structure_long", "Step 1: none " + std::string(2000, 'x'), "none", 1024, 0, 1, 0},
      {"empty_string", "", "none", 1024, 0, 0, 0},
      {"length_1024_at_1024", std::string(1024, 'x'), "none", 1024, 0, 0, 0},
      {"length_1025_at_1024", std::string(1025, 'x'), "none", 1024, 0, 1, 0},
      {"length_10_at_8", "0123456789", "none", 8, 0, 1, 0},
      {"length_8_at_8", "01234567", "none", 8, 0, 0, 0},
      {"utf8_counts_code_points", "\xC3\xA9\xC3\xA9\xC3\xA9\xC3\xA9\xC3\xA9", "none", 8, 0, 0, 0},
      {"utf8_over_threshold", "\xC3\xA9\xC3\xA9\xC3\xA9\xC3\xA9\xC3\xA9", "none", 4, 0, 1, 0},
  };
  for (std::size_t i = 0; i < kSteps.size(); ++i) {
    g.push_back({"missing_step_" + std::to_string(i + 1), think(without(i)) + "<answer>none</answer>",
                 "none", 1024, 0, 0, 0});
  }
  return g;
}

// Random strings built from bytes and template fragments; a third are
// well-formed responses with a few bytes overwritten.
inline std::string fuzz_string(Rng& rng) {
  if (rng.uniform() < 1.0 / 3.0) {
    const char* answers[] = {"none", "/per/org/opposed_to", "/per/per/peer", "/x/y/z"};
    std::string s = well_formed(answers[rng.index(4)]);
    const auto edits = rng.index(3);
    for (std::uint64_t i = 0; i < edits; ++i) s[rng.index(s.size())] = static_cast<char>(rng.index(256));
    return s;
  }
  static const std::vector<std::string> pieces = {
      "<think>", "</think>", "<answer>", "</answer>", "Step 1:", "Step 2:", "Step 3:",
      "Step 4:", "Step 5:",  "Step 6:",  "Step 7:",  "none",     "/per/org/opposed_to",
      " ",       "\n",       "<",        ">",        ":",        "Step ",   "/per/per/peer"};
  std::string s;
  const auto n = rng.index(40);
  for (std::uint64_t i = 0; i < n; ++i) {
    if (rng.uniform() < 0.6) {
      s += pieces[rng.index(pieces.size())];
    } else {
      s += static_cast<char>(rng.index(256));
    }
  }
  return s;
}

}  // namespace relgrpo::testing
