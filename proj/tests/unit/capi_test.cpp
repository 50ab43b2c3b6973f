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

#include <cstring>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "gtest/gtest.h"
#include "relgrpo/relgrpo.h"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class Session {
 public:
  explicit Session(const fs::path& dir) {
    fs::remove_all(dir);
    EXPECT_EQ(relgrpo_session_open(nullptr, dir.c_str(), &s_), RELGRPO_OK) << relgrpo_last_error();
  }
  ~Session() { relgrpo_session_close(s_); }
  relgrpo_session* get() { return s_; }
  json result() const { return json::parse(relgrpo_session_result_json(s_)); }

 private:
  relgrpo_session* s_ = nullptr;
};

void shrink(relgrpo_session* s) {
  const char* overrides[][2] = {
      {"synthetic.num_train", "300"}, {"synthetic.num_eval", "100"}, {"stage1.sft_epochs", "10"},
      {"stage2.epochs", "1"},         {"stage2.batch_size", "8"},    {"stage2.group_size", "4"},
      {"reward.length_threshold", "299"}, {"ablation_seeds", "2"},
  };
  for (const auto& kv : overrides) ASSERT_EQ(relgrpo_session_set(s, kv[0], kv[1]), RELGRPO_OK);
}

TEST(CApi, VersionAndStatusNames) {
  EXPECT_GT(std::strlen(relgrpo_version()), 0u);
  EXPECT_STREQ(relgrpo_status_name(RELGRPO_OK), "ok");
  EXPECT_STREQ(relgrpo_status_name(RELGRPO_E_UNKNOWN_LABEL), "unknown_label");
  EXPECT_STREQ(relgrpo_status_name(RELGRPO_E_MISSING_CHECKPOINT), "missing_checkpoint");
}

TEST(CApi, ScoreResponse) {
  const char* good =
      "<think> Step 1: a Step 2: b Step 3: c Step 4: d Step 5: e Step 6: f </think> "
      "<answer>/per/org/member_of</answer>";
  double out[4] = {-1, -1, -1, -1};
  ASSERT_EQ(relgrpo_score_response(good, "/per/org/member_of", 1024, out), RELGRPO_OK);
  EXPECT_EQ(out[0], 1.0);
  EXPECT_EQ(out[1], 0.0);
  EXPECT_EQ(out[2], 1.0);
  EXPECT_EQ(out[3], 2.0);
  ASSERT_EQ(relgrpo_score_response(good, "/per/org/member_of", 10, out), RELGRPO_OK);
  EXPECT_EQ(out[3], 3.0);
  EXPECT_EQ(relgrpo_score_response(good, "/not/a/label", 1024, out), RELGRPO_E_UNKNOWN_LABEL);
  EXPECT_NE(std::strlen(relgrpo_last_error()), 0u);
  EXPECT_EQ(relgrpo_score_response(nullptr, "none", 1024, out), RELGRPO_E_INVALID_ARGUMENT);
}

TEST(CApi, MixCounts) {
  size_t easy = 0, hard = 0;
  ASSERT_EQ(relgrpo_mix_counts(3, 0.5, 16, &easy, &hard), RELGRPO_OK);
  EXPECT_EQ(easy, 4u);
  EXPECT_EQ(hard, 12u);
  EXPECT_EQ(relgrpo_mix_counts(0, 0.5, 16, &easy, &hard), RELGRPO_E_INVALID_ARGUMENT);
  EXPECT_EQ(relgrpo_mix_counts(1, 0.5, 16, nullptr, &hard), RELGRPO_E_INVALID_ARGUMENT);
}

TEST(CApi, ConfigErrors) {
  relgrpo_session* s = nullptr;
  EXPECT_EQ(relgrpo_session_open("/nonexistent/config.json", nullptr, &s), RELGRPO_E_CONFIG);
  EXPECT_EQ(s, nullptr);
  Session ok(fs::temp_directory_path() / "relgrpo_capi_config");
  EXPECT_EQ(relgrpo_session_set(ok.get(), "stage2.unknown", "1"), RELGRPO_E_CONFIG);
  ASSERT_EQ(relgrpo_session_set(ok.get(), "stage2.alpha", "0.25"), RELGRPO_OK);
  ASSERT_EQ(relgrpo_session_set_seed(ok.get(), 77), RELGRPO_OK);
  const auto cfg = json::parse(relgrpo_session_config_json(ok.get()));
  EXPECT_EQ(cfg["stage2"]["alpha"], 0.25);
  EXPECT_EQ(cfg["seed"], 77);
  ASSERT_EQ(relgrpo_session_set(ok.get(), "stage2.mix_mode", "sideways"), RELGRPO_OK);
  EXPECT_EQ(relgrpo_gen_synthetic(ok.get()), RELGRPO_E_CONFIG);
}

TEST(CApi, MissingCheckpoint) {
  Session s(fs::temp_directory_path() / "relgrpo_capi_missing");
  EXPECT_EQ(relgrpo_evaluate(s.get(), nullptr), RELGRPO_E_MISSING_CHECKPOINT);
  EXPECT_EQ(relgrpo_train_stage2(s.get()), RELGRPO_E_MISSING_CHECKPOINT);
}

TEST(CApi, FullPipeline) {
  const auto dir = fs::temp_directory_path() / "relgrpo_capi_pipeline";
  Session s(dir);
  shrink(s.get());
  ASSERT_EQ(relgrpo_gen_synthetic(s.get()), RELGRPO_OK) << relgrpo_last_error();
  EXPECT_TRUE(fs::exists(dir / "train.jsonl"));
  ASSERT_EQ(relgrpo_build_sft(s.get()), RELGRPO_OK) << relgrpo_last_error();
  EXPECT_TRUE(fs::exists(dir / "sft.jsonl"));
  ASSERT_EQ(relgrpo_train_stage1(s.get()), RELGRPO_OK) << relgrpo_last_error();
  ASSERT_EQ(relgrpo_split_difficulty(s.get()), RELGRPO_OK) << relgrpo_last_error();
  ASSERT_EQ(relgrpo_train_stage2(s.get()), RELGRPO_OK) << relgrpo_last_error();
  EXPECT_TRUE(fs::exists(dir / "checkpoints" / "stage2_final.json"));
  ASSERT_EQ(relgrpo_evaluate(s.get(), nullptr), RELGRPO_OK) << relgrpo_last_error();
  const auto report = s.result();
  EXPECT_GE(report["accuracy"].get<double>(), 0.0);
  EXPECT_LE(report["accuracy"].get<double>(), 1.0);
  EXPECT_GT(std::strlen(relgrpo_session_summary(s.get())), 0u);
  EXPECT_TRUE(fs::exists(dir / "logs" / "eval_report.json"));
}

TEST(CApi, InspectReward) {
  const auto dir = fs::temp_directory_path() / "relgrpo_capi_inspect";
  Session s(dir);
  const std::string data = RELGRPO_TEST_DATA_DIR;
  ASSERT_EQ(relgrpo_inspect_reward(s.get(), (data + "/responses.jsonl").c_str(),
                                   (data + "/golds.jsonl").c_str()),
            RELGRPO_OK)
      << relgrpo_last_error();
  EXPECT_NE(std::string(relgrpo_session_summary(s.get())).find("3 responses"), std::string::npos);
  EXPECT_EQ(relgrpo_inspect_reward(s.get(), (data + "/responses.jsonl").c_str(),
                                   (data + "/missing.jsonl").c_str()),
            RELGRPO_E_IO);
}

}  // namespace
