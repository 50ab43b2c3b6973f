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

#include "core/scheduler.hpp"

#include <algorithm>
#include <cmath>

#include "core/error.hpp"
#include "core/reward.hpp"

namespace relgrpo {

std::vector<Json> DifficultySplit::to_jsonl() const {
  std::unordered_set<std::string> easy(easy_ids.begin(), easy_ids.end());
  std::vector<Json> rows;
  for (const auto& [id, pred] : predictions) {
    Json row;
    row["sample_id"] = id;
    row["difficulty"] = easy.count(id) ? "easy" : "hard";
    row["judge_prediction"] = pred ? Json(*pred) : Json(nullptr);
    rows.push_back(std::move(row));
  }
  return rows;
}

DifficultySplit DifficultySplit::from_jsonl(const std::vector<Json>& rows, std::string provenance) {
  DifficultySplit split;
  split.provenance = std::move(provenance);
  for (const auto& row : rows) {
    const auto id = row.at("sample_id").get<std::string>();
    const auto tag = row.at("difficulty").get<std::string>();
    std::optional<std::string> pred;
    if (row.contains("judge_prediction") && !row["judge_prediction"].is_null()) {
      pred = row["judge_prediction"].get<std::string>();
    }
    if (tag == "easy") {
      split.easy_ids.push_back(id);
    } else if (tag == "hard") {
      split.hard_ids.push_back(id);
    } else {
      throw ParseError("difficulty must be easy or hard, got " + tag);
    }
    split.predictions.emplace_back(id, std::move(pred));
  }
  return split;
}

DifficultySplit split_by_difficulty(const std::vector<Sample>& pool, const Judge& judge,
                                    const LabelInventory& inv, std::string provenance) {
  DifficultySplit split;
  split.provenance = std::move(provenance);
  for (const auto& s : pool) {
    const auto pred = judge(s);
    const auto gold = inv.find(s.gold_label);
    if (!gold) throw UnknownLabel("sample " + s.sample_id + ": unknown gold " + s.gold_label);
    const auto got = pred ? inv.find(*pred) : std::nullopt;
    if (got && *got == *gold) {
      split.easy_ids.push_back(s.sample_id);
    } else {
      split.hard_ids.push_back(s.sample_id);
    }
    split.predictions.emplace_back(s.sample_id, pred);
  }
  return split;
}

DifficultySplit split_by_difficulty(const std::vector<Sample>& pool, const PolicySnapshot& judge,
                                    const Phrasebook& book, const LabelInventory& inv) {
  Rng unused(0);
  Judge fn = [&](const Sample& s) -> std::optional<std::string> {
    const auto seq = judge.policy().sample(to_query(s, inv), 0.0, unused);
    const auto parsed = parse_response(render_text(seq.tokens, book, inv));
    return parsed.answer_text;
  };
  return split_by_difficulty(pool, fn, inv, "greedy:" + judge.tag());
}

MixMode MixMode::parse(const std::string& name, double alpha) {
  if (name == "progressive") return progressive(alpha);
  if (name == "raw") return raw();
  if (name == "fixed-equal") return fixed_equal();
  if (name == "hard-only") return hard_only();
  throw InvalidArgument("unknown mix mode '" + name +
                        "' (expected progressive, raw, fixed-equal or hard-only)");
}

std::string MixMode::name() const {
  switch (kind) {
    case MixKind::kProgressive: return "progressive";
    case MixKind::kRaw: return "raw";
    case MixKind::kFixedEqual: return "fixed-equal";
    case MixKind::kHardOnly: return "hard-only";
  }
  return "?";
}

void MixMode::validate() const {
  if (kind == MixKind::kProgressive && !(alpha > 0.0 && alpha <= 1.0)) {
    throw InvalidArgument("progressive mixing needs alpha in (0, 1]");
  }
}

MixPlan mix_counts(int epoch, double alpha, std::size_t batch_size) {
  if (epoch < 1) throw InvalidArgument("epoch must be >= 1");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidArgument("alpha must be in (0, 1]");
  if (batch_size < 2) throw InvalidArgument("batch size must be >= 2");
  const double r = std::pow(alpha, epoch - 1);
  const double easy_real = r * static_cast<double>(batch_size) / (1.0 + r);
  // Values like 8.000000000000002 must not round up.
  const auto easy = static_cast<std::size_t>(std::ceil(easy_real - 1e-9));
  return MixPlan{epoch, std::min(easy, batch_size), batch_size - std::min(easy, batch_size),
                 batch_size};
}

std::vector<EpochPlan> epoch_schedule(const MixMode& mode, std::size_t num_easy,
                                      std::size_t num_hard, std::size_t batch_size, int epochs) {
  mode.validate();
  if (batch_size < 2) throw InvalidArgument("batch size must be >= 2");
  std::vector<EpochPlan> out;
  for (int t = 1; t <= epochs; ++t) {
    EpochPlan e;
    e.hard_total = num_hard;
    switch (mode.kind) {
      case MixKind::kRaw:
        e.plan = MixPlan{t, 0, 0, batch_size};
        e.easy_total = num_easy;
        e.full_pool = true;
        break;
      case MixKind::kHardOnly:
        e.plan = MixPlan{t, 0, batch_size, batch_size};
        e.easy_total = 0;
        break;
      case MixKind::kProgressive:
      case MixKind::kFixedEqual: {
        const double alpha = mode.kind == MixKind::kFixedEqual ? 1.0 : mode.alpha;
        e.plan = mix_counts(t, alpha, batch_size);
        const double want = std::round(static_cast<double>(num_hard) * std::pow(alpha, t - 1));
        e.easy_total = std::min(num_easy, static_cast<std::size_t>(want));
        break;
      }
    }
    e.steps = (e.size() + batch_size - 1) / batch_size;
    out.push_back(e);
  }
  return out;
}

std::vector<std::string> stratified_draw(std::vector<std::string> none_ids,
                                         std::vector<std::string> other_ids, double none_fraction,
                                         std::size_t n, Rng& rng) {
  if (none_ids.size() + other_ids.size() < n) {
    throw PoolExhausted("need " + std::to_string(n) + " samples, only " +
                        std::to_string(none_ids.size() + other_ids.size()) + " available");
  }
  rng.shuffle(none_ids);
  rng.shuffle(other_ids);
  auto want_none = static_cast<std::size_t>(std::llround(static_cast<double>(n) * none_fraction));
  want_none = std::min(want_none, n);
  std::size_t take_none = std::min(want_none, none_ids.size());
  std::size_t take_other = std::min(n - take_none, other_ids.size());
  take_none = n - take_other;
  std::vector<std::string> out(none_ids.begin(), none_ids.begin() + static_cast<long>(take_none));
  out.insert(out.end(), other_ids.begin(), other_ids.begin() + static_cast<long>(take_other));
  rng.shuffle(out);
  return out;
}

namespace {

void partition_none(const std::vector<std::string>& ids,
                    const std::unordered_set<std::string>& none_set,
                    std::vector<std::string>& none_ids, std::vector<std::string>& other_ids) {
  for (const auto& id : ids) (none_set.count(id) ? none_ids : other_ids).push_back(id);
}

}  // namespace

std::vector<std::string> compose_batch(const MixPlan& plan, const std::vector<std::string>& easy_ids,
                                       const std::vector<std::string>& hard_ids,
                                       const std::unordered_set<std::string>& none_ids,
                                       double none_fraction, Rng& rng) {
  if (easy_ids.size() < plan.easy_count || hard_ids.size() < plan.hard_count) {
    throw PoolExhausted("plan needs " + std::to_string(plan.easy_count) + " easy / " +
                        std::to_string(plan.hard_count) + " hard, have " +
                        std::to_string(easy_ids.size()) + " / " + std::to_string(hard_ids.size()));
  }
  std::vector<std::string> easy_none, easy_other;
  partition_none(easy_ids, none_ids, easy_none, easy_other);
  auto batch = stratified_draw(std::move(easy_none), std::move(easy_other), none_fraction,
                               plan.easy_count, rng);
  auto hard = hard_ids;
  rng.shuffle(hard);
  batch.insert(batch.end(), hard.begin(), hard.begin() + static_cast<long>(plan.hard_count));
  rng.shuffle(batch);
  return batch;
}

EpochSampler::EpochSampler(const EpochPlan& plan, const DifficultySplit& split,
                           const std::unordered_set<std::string>& none_ids, double none_fraction,
                           Rng rng)
    : plan_(plan), rng_(std::move(rng)) {
  if (plan_.full_pool) {
    // Raw: one shuffled queue; everything is treated as "hard" for bookkeeping.
    hard_ = split.easy_ids;
    hard_.insert(hard_.end(), split.hard_ids.begin(), split.hard_ids.end());
    rng_.shuffle(hard_);
    return;
  }
  hard_ = split.hard_ids;
  rng_.shuffle(hard_);
  if (plan_.easy_total > 0) {
    std::vector<std::string> easy_none, easy_other;
    partition_none(split.easy_ids, none_ids, easy_none, easy_other);
    easy_ = stratified_draw(std::move(easy_none), std::move(easy_other), none_fraction,
                            plan_.easy_total, rng_);
  }
}

BatchDraw EpochSampler::next() {
  if (done()) throw PoolExhausted("epoch " + std::to_string(plan_.plan.epoch) + " has no data left");
  const std::size_t b = plan_.plan.batch_size;
  BatchDraw draw;
  std::size_t want_easy = plan_.full_pool ? 0 : plan_.plan.easy_count;
  std::size_t want_hard = plan_.full_pool ? b : plan_.plan.hard_count;
  std::size_t take_easy = std::min(want_easy, easy_.size());
  std::size_t take_hard = std::min(want_hard, hard_.size());
  // Backfill from the other side so every epoch sample is used exactly once.
  const std::size_t spare_hard = hard_.size() - take_hard;
  const std::size_t fill_hard = std::min(b - take_easy - take_hard, spare_hard);
  take_hard += fill_hard;
  const std::size_t spare_easy = easy_.size() - take_easy;
  take_easy += std::min(b - take_easy - take_hard, spare_easy);
  draw.deviates = !plan_.full_pool && (take_easy != want_easy || take_hard != want_hard);
  draw.easy = take_easy;
  draw.hard = take_hard;
  draw.ids.assign(easy_.end() - static_cast<long>(take_easy), easy_.end());
  easy_.resize(easy_.size() - take_easy);
  draw.ids.insert(draw.ids.end(), hard_.end() - static_cast<long>(take_hard), hard_.end());
  hard_.resize(hard_.size() - take_hard);
  rng_.shuffle(draw.ids);
  return draw;
}

}  // namespace relgrpo
