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

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "core/policy.hpp"
#include "core/rng.hpp"
#include "core/sample.hpp"

namespace relgrpo {

// Easy/hard partition of the RL pool, judged once after the cold start.
struct DifficultySplit {
  std::vector<std::string> easy_ids;
  std::vector<std::string> hard_ids;
  std::string provenance;
  // Judge's answer text per sample id; nullopt when the output was unparsable.
  std::vector<std::pair<std::string, std::optional<std::string>>> predictions;

  std::vector<Json> to_jsonl() const;
  static DifficultySplit from_jsonl(const std::vector<Json>& rows, std::string provenance);
};

// Predicted answer text for a sample, or nullopt when no answer could be parsed.
using Judge = std::function<std::optional<std::string>(const Sample&)>;

// Correct prediction -> easy; wrong or unparsable -> hard. Pool order is kept.
DifficultySplit split_by_difficulty(const std::vector<Sample>& pool, const Judge& judge,
                                    const LabelInventory& inv, std::string provenance);

// Greedy (temperature 0) decoding of the judge policy through the template.
DifficultySplit split_by_difficulty(const std::vector<Sample>& pool, const PolicySnapshot& judge,
                                    const Phrasebook& book, const LabelInventory& inv);

enum class MixKind { kProgressive, kRaw, kFixedEqual, kHardOnly };

struct MixMode {
  MixKind kind = MixKind::kProgressive;
  double alpha = 0.5;

  static MixMode progressive(double alpha) { return {MixKind::kProgressive, alpha}; }
  static MixMode raw() { return {MixKind::kRaw, 1.0}; }
  static MixMode fixed_equal() { return {MixKind::kFixedEqual, 1.0}; }
  static MixMode hard_only() { return {MixKind::kHardOnly, 0.0}; }

  // progressive | raw | fixed-equal | hard-only
  static MixMode parse(const std::string& name, double alpha);
  std::string name() const;
  void validate() const;
};

struct MixPlan {
  int epoch = 1;
  std::size_t easy_count = 0;
  std::size_t hard_count = 0;
  std::size_t batch_size = 0;
};

// easy = ceil(a^(t-1) B / (1 + a^(t-1))), hard = B - easy.
MixPlan mix_counts(int epoch, double alpha, std::size_t batch_size);

struct EpochPlan {
  MixPlan plan;
  std::size_t easy_total = 0;
  std::size_t hard_total = 0;
  std::size_t steps = 0;
  // Raw mode: batches are cut from the whole shuffled pool, not mixed by plan.
  bool full_pool = false;

  std::size_t size() const { return easy_total + hard_total; }
};

// Per epoch: all hard samples plus round(|hard| a^(t-1)) easy ones (capped at
// the easy pool), steps = ceil(size / B). Raw uses the whole pool every epoch.
std::vector<EpochPlan> epoch_schedule(const MixMode& mode, std::size_t num_easy,
                                      std::size_t num_hard, std::size_t batch_size, int epochs);

// Draws n ids so that round(n * none_fraction) come from none_ids and the rest
// from other_ids; a short stratum is backfilled from the other one. Throws
// PoolExhausted when fewer than n ids exist in total.
std::vector<std::string> stratified_draw(std::vector<std::string> none_ids,
                                         std::vector<std::string> other_ids, double none_fraction,
                                         std::size_t n, Rng& rng);

// One mini-batch drawn exactly to plan from the given easy and hard ids
// (easy draws stratified by none_fraction), shuffled. Throws PoolExhausted
// when the plan cannot be met.
std::vector<std::string> compose_batch(const MixPlan& plan, const std::vector<std::string>& easy_ids,
                                       const std::vector<std::string>& hard_ids,
                                       const std::unordered_set<std::string>& none_ids,
                                       double none_fraction, Rng& rng);

struct BatchDraw {
  std::vector<std::string> ids;
  std::size_t easy = 0;
  std::size_t hard = 0;
  // Composition differs from the plan because one side ran out.
  bool deviates = false;
};

// Without-replacement batch source for one epoch. Each sample of the epoch's
// data appears exactly once across the epoch's batches.
class EpochSampler {
 public:
  EpochSampler(const EpochPlan& plan, const DifficultySplit& split,
               const std::unordered_set<std::string>& none_ids, double none_fraction, Rng rng);

  bool done() const { return easy_.empty() && hard_.empty(); }

  // Throws PoolExhausted when the epoch has no data left.
  BatchDraw next();

 private:
  EpochPlan plan_;
  Rng rng_;
  std::vector<std::string> easy_;
  std::vector<std::string> hard_;
};

}  // namespace relgrpo
