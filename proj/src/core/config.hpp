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

#include <cstdint>
#include <filesystem>
#include <string>

#include "core/datagen.hpp"
#include "core/grpo.hpp"
#include "core/jsonl.hpp"
#include "core/reward.hpp"
#include "core/scheduler.hpp"

namespace relgrpo {

struct Stage1Config {
  double fraction = 0.25;
  std::size_t sft_epochs = 40;
  double lr = 0.5;
  std::size_t batch_size = 32;
};

struct Stage2Config {
  int epochs = 4;
  std::size_t batch_size = 16;
  int group_size = 8;
  double alpha = 0.5;
  double epsilon = 0.2;
  double beta = 0.001;
  int mu = 2;
  double lr = 1.0;
  double temperature = 0.8;
  std::string mix_mode = "progressive";
  std::string optimizer = "sgd";
  int workers = 1;

  GrpoHyperparams hyperparams() const { return {epsilon, beta, mu, group_size}; }
  MixMode mode() const { return MixMode::parse(mix_mode, alpha); }
  OptimizerConfig optimizer_config() const;
};

struct ExpertConfig {
  // "mock" or "http".
  std::string kind = "mock";
  std::string url;
  double timeout_seconds = 30.0;
  int transport_retries = 2;
  int max_rejection_retries = 2;
  int concurrency = 1;
  double mock_wrong_rate = 0.0;
};

// Relative paths resolve against the run directory.
struct PathsConfig {
  std::string dataset = "train.jsonl";
  std::string eval_dataset = "eval.jsonl";
  std::string inventory;  // empty: built-in inventory
  std::string sft_records = "sft.jsonl";
  std::string checkpoints = "checkpoints";
  std::string logs = "logs";
};

struct RunConfig {
  std::uint64_t seed = 0;
  Stage1Config stage1;
  Stage2Config stage2;
  RewardConfig reward;
  ExpertConfig expert;
  SyntheticTaskSpec synthetic;
  PathsConfig paths;
  int ablation_seeds = 5;

  // Unknown keys are rejected. Missing keys keep their defaults.
  static RunConfig from_json(const Json& j);
  static RunConfig load(const std::filesystem::path& path);
  Json to_json() const;

  // Dotted key ("stage2.alpha"); value is parsed as JSON, else taken as a string.
  void set(const std::string& key, const std::string& value);

  // Throws ConfigError.
  void validate() const;
};

}  // namespace relgrpo
