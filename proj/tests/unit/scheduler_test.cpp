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

#include <map>
#include <set>

#include "gtest/gtest.h"

#include "core/error.hpp"
#include "core/scheduler.hpp"

namespace relgrpo {
namespace {

std::vector<std::string> ids(const std::string& prefix, std::size_t n) {
  std::vector<std::string> v;
  for (std::size_t i = 0; i < n; ++i) v.push_back(prefix + std::to_string(i));
  return v;
}

TEST(MixCounts, ProgressiveHalfTable) {
  const std::pair<std::size_t, std::size_t> expected[] = {{8, 8}, {6, 10}, {4, 12}, {2, 14}};
  for (int t = 1; t <= 4; ++t) {
    const auto p = mix_counts(t, 0.5, 16);
    EXPECT_EQ(p.easy_count, expected[t - 1].first) << t;
    EXPECT_EQ(p.hard_count, expected[t - 1].second) << t;
  }
}

TEST(MixCounts, AlphaOneIsAlwaysEven) {
  for (int t = 1; t <= 10; ++t) {
    const auto p = mix_counts(t, 1.0, 16);
    EXPECT_EQ(p.easy_count, 8u);
    EXPECT_EQ(p.hard_count, 8u);
  }
}

TEST(MixCounts, MonotoneAndSumsToBatch) {
  for (double alpha : {0.1, 0.3, 0.5, 0.7, 0.9, 1.0}) {
    for (std::size_t b : {2u, 3u, 7u, 16u, 33u, 64u}) {
      std::size_t prev_easy = b, prev_hard = 0;
      for (int t = 1; t <= 12; ++t) {
        const auto p = mix_counts(t, alpha, b);
        EXPECT_EQ(p.easy_count + p.hard_count, b);
        EXPECT_LE(p.easy_count, prev_easy);
        EXPECT_GE(p.hard_count, prev_hard);
        prev_easy = p.easy_count;
        prev_hard = p.hard_count;
      }
    }
  }
}

TEST(MixCounts, RejectsBadArguments) {
  EXPECT_THROW(mix_counts(0, 0.5, 16), InvalidArgument);
  EXPECT_THROW(mix_counts(1, 0.0, 16), InvalidArgument);
  EXPECT_THROW(mix_counts(1, 1.5, 16), InvalidArgument);
  EXPECT_THROW(mix_counts(1, 0.5, 1), InvalidArgument);
}

TEST(MixMode, ParseAndValidate) {
  EXPECT_EQ(MixMode::parse("raw", 0.5).kind, MixKind::kRaw);
  EXPECT_EQ(MixMode::parse("hard-only", 0.5).kind, MixKind::kHardOnly);
  EXPECT_EQ(MixMode::parse("fixed-equal", 0.5).name(), "fixed-equal");
  EXPECT_THROW(MixMode::parse("curriculum", 0.5), InvalidArgument);
  EXPECT_THROW(MixMode::progressive(0.0).validate(), InvalidArgument);
  EXPECT_NO_THROW(MixMode::progressive(1.0).validate());
}

TEST(EpochSchedule, ProgressiveUsesHardPlusScaledEasy) {
  const auto s = epoch_schedule(MixMode::progressive(0.5), 1000, 100, 16, 4);
  ASSERT_EQ(s.size(), 4u);
  EXPECT_EQ(s[1].easy_total, 50u);
  EXPECT_EQ(s[1].size(), 150u);
  EXPECT_EQ(s[1].steps, 10u);
  EXPECT_EQ(s[0].easy_total, 100u);
  EXPECT_EQ(s[3].easy_total, 13u);
}

TEST(EpochSchedule, EasyTotalCappedByEasyPool) {
  const auto s = epoch_schedule(MixMode::progressive(0.5), 30, 100, 16, 2);
  EXPECT_EQ(s[0].easy_total, 30u);
  EXPECT_EQ(s[1].easy_total, 30u);
}

TEST(EpochSchedule, RawUsesTheFullPoolEveryEpoch) {
  for (const auto& e : epoch_schedule(MixMode::raw(), 900, 100, 16, 4)) {
    EXPECT_TRUE(e.full_pool);
    EXPECT_EQ(e.size(), 1000u);
    EXPECT_EQ(e.steps, 63u);
  }
}

TEST(EpochSchedule, FixedEqualMatchesProgressiveAlphaOne) {
  const auto a = epoch_schedule(MixMode::fixed_equal(), 500, 120, 16, 5);
  const auto b = epoch_schedule(MixMode::progressive(1.0), 500, 120, 16, 5);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].plan.easy_count, b[i].plan.easy_count);
    EXPECT_EQ(a[i].plan.hard_count, b[i].plan.hard_count);
    EXPECT_EQ(a[i].easy_total, b[i].easy_total);
    EXPECT_EQ(a[i].easy_total, 120u);
    EXPECT_EQ(a[i].steps, b[i].steps);
  }
}

TEST(EpochSchedule, HardOnlyHasNoEasy) {
  for (const auto& e : epoch_schedule(MixMode::hard_only(), 500, 120, 16, 3)) {
    EXPECT_EQ(e.easy_total, 0u);
    EXPECT_EQ(e.plan.hard_count, 16u);
    EXPECT_EQ(e.steps, 8u);
  }
}

TEST(EpochSchedule, ZeroEpochs) {
  EXPECT_TRUE(epoch_schedule(MixMode::progressive(0.5), 10, 10, 4, 0).empty());
}

TEST(StratifiedDraw, NearestIntegerSplit) {
  Rng rng(1);
  auto none = ids("n", 90);
  auto other = ids("o", 10);
  const auto got = stratified_draw(none, other, 0.48, 6, rng);
  ASSERT_EQ(got.size(), 6u);
  const auto n_none = std::count_if(got.begin(), got.end(), [](const std::string& s) {
    return s[0] == 'n';
  });
  EXPECT_EQ(n_none, 3);
}

TEST(StratifiedDraw, BackfillsShortStratum) {
  Rng rng(2);
  const auto got = stratified_draw(ids("n", 10), ids("o", 1), 0.5, 6, rng);
  EXPECT_EQ(std::count_if(got.begin(), got.end(), [](const std::string& s) { return s[0] == 'o'; }),
            1);
  EXPECT_THROW(stratified_draw(ids("n", 2), ids("o", 1), 0.5, 4, rng), PoolExhausted);
}

TEST(ComposeBatch, ExactComposition) {
  Rng rng(3);
  const auto easy = ids("e", 40), hard = ids("h", 40);
  const auto batch = compose_batch(mix_counts(1, 0.5, 16), easy, hard, {}, 0.5, rng);
  ASSERT_EQ(batch.size(), 16u);
  EXPECT_EQ(std::set<std::string>(batch.begin(), batch.end()).size(), 16u);
  EXPECT_EQ(std::count_if(batch.begin(), batch.end(), [](const std::string& s) {
              return s[0] == 'e';
            }),
            8);
  EXPECT_THROW(compose_batch(mix_counts(1, 0.5, 16), ids("e", 3), hard, {}, 0.5, rng),
               PoolExhausted);
}

DifficultySplit split_of(std::size_t easy, std::size_t hard) {
  DifficultySplit s;
  s.easy_ids = ids("e", easy);
  s.hard_ids = ids("h", hard);
  return s;
}

TEST(EpochSampler, EveryHardSampleExactlyOncePerEpoch) {
  for (const auto& mode : {MixMode::progressive(0.5), MixMode::hard_only(), MixMode::fixed_equal()}) {
    const auto split = split_of(300, 77);
    for (const auto& plan : epoch_schedule(mode, 300, 77, 16, 4)) {
      EpochSampler sampler(plan, split, {}, 0.5, Rng(plan.plan.epoch));
      std::map<std::string, int> seen;
      std::size_t steps = 0;
      while (!sampler.done()) {
        const auto d = sampler.next();
        EXPECT_LE(d.ids.size(), 16u);
        for (const auto& id : d.ids) ++seen[id];
        ++steps;
      }
      EXPECT_EQ(steps, plan.steps);
      std::size_t hard = 0, easy = 0;
      for (const auto& [id, n] : seen) {
        EXPECT_EQ(n, 1) << id;
        (id[0] == 'h' ? hard : easy) += 1;
      }
      EXPECT_EQ(hard, 77u);
      EXPECT_EQ(easy, plan.easy_total);
    }
  }
}

TEST(EpochSampler, FollowsPlanUntilASideRunsOut) {
  const auto split = split_of(300, 100);
  const auto plan = epoch_schedule(MixMode::progressive(0.5), 300, 100, 16, 2)[1];
  EpochSampler sampler(plan, split, {}, 0.5, Rng(5));
  const auto first = sampler.next();
  EXPECT_EQ(first.easy, 6u);
  EXPECT_EQ(first.hard, 10u);
  EXPECT_FALSE(first.deviates);
}

TEST(EpochSampler, EasyDrawIsStratified) {
  DifficultySplit split = split_of(200, 50);
  std::unordered_set<std::string> none;
  for (std::size_t i = 0; i < 100; ++i) none.insert("e" + std::to_string(i));
  const auto plan = epoch_schedule(MixMode::fixed_equal(), 200, 50, 16, 1)[0];
  EpochSampler sampler(plan, split, none, 0.48, Rng(6));
  std::size_t n_none = 0, n_easy = 0;
  while (!sampler.done()) {
    for (const auto& id : sampler.next().ids) {
      if (id[0] == 'e') {
        ++n_easy;
        n_none += none.count(id);
      }
    }
  }
  EXPECT_EQ(n_easy, 50u);
  EXPECT_EQ(n_none, 24u);
}

TEST(EpochSampler, RawCoversThePool) {
  const auto split = split_of(50, 30);
  const auto plan = epoch_schedule(MixMode::raw(), 50, 30, 16, 1)[0];
  EpochSampler sampler(plan, split, {}, 0.5, Rng(7));
  std::set<std::string> seen;
  while (!sampler.done()) {
    for (const auto& id : sampler.next().ids) EXPECT_TRUE(seen.insert(id).second);
  }
  EXPECT_EQ(seen.size(), 80u);
}

TEST(SplitByDifficulty, ScriptedJudge) {
  const auto inv = LabelInventory::builtin();
  std::vector<Sample> pool;
  std::set<std::string> failing;
  for (int i = 0; i < 100; ++i) {
    Sample s;
    s.sample_id = "s" + std::to_string(i);
    s.gold_label = i % 3 == 0 ? "none" : "/per/org/member_of";
    if (i % 5 == 0) failing.insert(s.sample_id);
    pool.push_back(s);
  }
  Judge judge = [&](const Sample& s) -> std::optional<std::string> {
    if (!failing.count(s.sample_id)) return s.gold_label;
    return s.gold_label == "none" ? std::optional<std::string>() : std::string("/per/org/leader_of");
  };
  const auto split = split_by_difficulty(pool, judge, inv, "scripted");
  EXPECT_EQ(std::set<std::string>(split.hard_ids.begin(), split.hard_ids.end()), failing);
  EXPECT_EQ(split.easy_ids.size() + split.hard_ids.size(), 100u);

  Judge oracle = [](const Sample& s) -> std::optional<std::string> { return s.gold_label; };
  EXPECT_TRUE(split_by_difficulty(pool, oracle, inv, "oracle").hard_ids.empty());
}

TEST(SplitByDifficulty, JsonlRoundTrip) {
  DifficultySplit s = split_of(3, 2);
  for (const auto& id : s.easy_ids) s.predictions.emplace_back(id, "none");
  for (const auto& id : s.hard_ids) s.predictions.emplace_back(id, std::nullopt);
  const auto back = DifficultySplit::from_jsonl(s.to_jsonl(), "file");
  EXPECT_EQ(back.easy_ids, s.easy_ids);
  EXPECT_EQ(back.hard_ids, s.hard_ids);
  EXPECT_EQ(back.predictions, s.predictions);
}

}  // namespace
}  // namespace relgrpo
