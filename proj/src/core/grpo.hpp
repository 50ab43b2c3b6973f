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

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "core/policy.hpp"
#include "core/reward.hpp"

namespace relgrpo {

// One sampled response. logp_old and logp_ref are fixed at collection time;
// logp_current tracks the live policy during the inner update loop.
struct Rollout {
  std::string query_id;
  TokenSeq tokens;
  std::string raw_text;
  double logp_current = 0.0;
  double logp_old = 0.0;
  double logp_ref = 0.0;
  RewardBreakdown reward;
};

// K rollouts for one query plus their standardized advantages.
struct Group {
  Query query;
  std::vector<Rollout> rollouts;
  std::vector<double> advantages;
};

struct GrpoHyperparams {
  double epsilon = 0.2;
  double beta = 0.001;
  int mu = 2;
  int group_size = 8;

  // Throws InvalidArgument.
  void validate() const;
};

// A_i = (r_i - mean) / std with the population std; all zeros when the
// std is below 1e-12. Throws GroupTooSmall for fewer than two rewards.
std::vector<double> compute_advantages(std::span<const double> rewards);

// Fills group.advantages from the rollouts' total rewards.
void standardize_group(Group& group);

// x - log x - 1 with x = pi_ref / pi_theta; the log-ratio is clamped to [-50, 50].
double kl_term(double logp_current, double logp_ref);

// Per-rollout pieces of the objective.
struct RolloutTerms {
  double ratio = 1.0;
  double surrogate = 0.0;
  double kl = 0.0;
  // The constant clip(ratio) * A branch is strictly smaller than ratio * A.
  bool clipped = false;
};

RolloutTerms rollout_terms(const Rollout& r, double advantage, const GrpoHyperparams& hp);

// (1/K) sum_i [min(xi_i A_i, clip(xi_i, 1-eps, 1+eps) A_i) - beta kl_i]; to be maximized.
double grpo_objective(const Group& group, const GrpoHyperparams& hp);

// Unweighted mean of grpo_objective over the groups.
double batch_objective(std::span<const Group> batch, const GrpoHyperparams& hp);

// Exact gradient of grpo_objective w.r.t. the policy parameters. Throws
// PolicyMismatch when a rollout's logp_current differs from the policy's own
// log-probability by more than 1e-9.
ParamVector grpo_objective_gradient(const Group& group, const GrpoHyperparams& hp,
                                    const ToyPolicy& policy);

ParamVector batch_objective_gradient(std::span<const Group> batch, const GrpoHyperparams& hp,
                                     const ToyPolicy& policy);

// Recomputes logp_current of every rollout under policy.
void refresh_current_logprobs(std::span<Group> batch, const ToyPolicy& policy);

struct BatchStats {
  double objective = 0.0;
  double mean_kl = 0.0;
  double clip_fraction = 0.0;
  double mean_abs_advantage = 0.0;
};

BatchStats batch_stats(std::span<const Group> batch, const GrpoHyperparams& hp);

struct OptimizerConfig {
  enum class Kind { kSgd, kMomentum, kAdam };
  Kind kind = Kind::kSgd;
  double lr = 1e-3;
  double momentum = 0.9;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Gradient ascent: params move along +gradient.
class Optimizer {
 public:
  virtual ~Optimizer() = default;
  virtual void step(std::span<double> params, const ParamVector& gradient) = 0;
};

std::unique_ptr<Optimizer> make_optimizer(const OptimizerConfig& cfg);

struct InnerLoopResult {
  // Objective before each of the mu steps, then after the last one.
  std::vector<double> objectives;
  // Statistics at the start of the first inner iteration.
  BatchStats initial;
  BatchStats final;
};

// Exactly hp.mu ascent steps on batch_objective; logp_current (hence the
// ratio) is recomputed against the frozen logp_old before every step.
InnerLoopResult inner_update_loop(std::vector<Group>& batch, const GrpoHyperparams& hp,
                                  ToyPolicy& policy, Optimizer& optimizer);

}  // namespace relgrpo
