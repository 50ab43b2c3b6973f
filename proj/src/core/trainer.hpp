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

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "core/config.hpp"
#include "core/datagen.hpp"
#include "core/grpo.hpp"
#include "core/metrics.hpp"
#include "core/policy.hpp"
#include "core/scheduler.hpp"

namespace relgrpo {

// A run directory plus the objects every stage needs.
class Workspace {
 public:
  Workspace(RunConfig cfg, std::filesystem::path root);

  const RunConfig& config() const { return cfg_; }
  const std::filesystem::path& root() const { return root_; }
  const LabelInventory& inventory() const { return inv_; }
  const Phrasebook& phrasebook() const { return book_; }

  std::filesystem::path resolve(const std::string& path) const;
  std::filesystem::path checkpoint(const std::string& name) const;
  std::filesystem::path log(const std::string& name) const;

  ToyPolicy fresh_policy() const;
  std::unique_ptr<ExpertClient> make_expert_client() const;

 private:
  RunConfig cfg_;
  std::filesystem::path root_;
  LabelInventory inv_;
  Phrasebook book_;
};

struct Stage1Result {
  ToyPolicy policy;
  std::vector<std::string> sft_ids;
  AnnotateStats annotation;
  bool annotated = false;
  std::size_t demos = 0;
  std::size_t unmapped = 0;
  std::vector<double> sft_history;
};

// The stage-1 stratified draw for this run's seed and fraction.
std::vector<Sample> select_stage1(const Workspace& ws, const std::vector<Sample>& dataset);

// Stratified draw, annotation (only for samples without persisted records) and SFT.
// Writes the SFT records, the stage-1 checkpoint and the list of stage-1 sample ids.
Stage1Result run_stage1(const Workspace& ws, const std::vector<Sample>& dataset,
                        ExpertClient* client);

std::vector<std::string> load_stage1_ids(const Workspace& ws);

// Training data minus the stage-1 samples.
std::vector<Sample> rl_pool(const std::vector<Sample>& dataset,
                            const std::vector<std::string>& stage1_ids);

struct StepTelemetry {
  int step = 0;
  int epoch = 0;
  std::size_t queries = 0;
  std::size_t easy = 0;
  std::size_t hard = 0;
  bool deviates = false;
  RewardBreakdown mean_reward;
  double mean_abs_advantage = 0.0;
  double objective_before = 0.0;
  double objective_after = 0.0;
  double mean_kl = 0.0;
  double clip_fraction = 0.0;

  Json to_json() const;
};

struct EpochSummary {
  int epoch = 0;
  EpochPlan plan;
  std::size_t steps = 0;
  double mean_reward = 0.0;
  std::optional<EvalReport> eval;
};

struct Stage2Result {
  ToyPolicy policy;
  DifficultySplit split;
  std::vector<EpochPlan> schedule;
  std::vector<StepTelemetry> steps;
  std::vector<EpochSummary> epochs;
  std::optional<EvalReport> best;
  int best_epoch = 0;
};

struct Stage2Options {
  // Evaluated after every epoch for best-checkpoint tracking when set.
  const std::vector<Sample>* eval = nullptr;
  // Reuse a split instead of judging the pool with the initial policy.
  std::optional<DifficultySplit> split;
  // Checkpoints and logs are written here when set.
  std::optional<std::filesystem::path> checkpoint_dir;
  std::optional<std::filesystem::path> log_dir;
};

Stage2Result run_stage2(const Workspace& ws, const ToyPolicy& init, const std::vector<Sample>& pool,
                        const Stage2Options& opt = {});

std::vector<Prediction> greedy_predictions(const ToyPolicy& policy,
                                           const std::vector<Sample>& samples,
                                           const Phrasebook& book, const LabelInventory& inv);

EvalReport evaluate_checkpoint(const ToyPolicy& policy, const std::vector<Sample>& eval,
                               const Phrasebook& book, const LabelInventory& inv);

// Subset of samples whose difficulty tag equals `tag`.
std::vector<Sample> with_difficulty(const std::vector<Sample>& samples, const std::string& tag);

}  // namespace relgrpo
