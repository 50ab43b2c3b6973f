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

#include "core/grpo.hpp"

#include <algorithm>
#include <cmath>

#include "core/error.hpp"

namespace relgrpo {

namespace {

constexpr double kZeroStd = 1e-12;
constexpr double kLogRatioClamp = 50.0;
constexpr double kMismatchTolerance = 1e-9;

class Sgd final : public Optimizer {
 public:
  explicit Sgd(double lr) : lr_(lr) {}
  void step(std::span<double> params, const ParamVector& g) override {
    for (std::size_t i = 0; i < params.size(); ++i) params[i] += lr_ * g[i];
  }

 private:
  double lr_;
};

class Momentum final : public Optimizer {
 public:
  Momentum(double lr, double momentum) : lr_(lr), momentum_(momentum) {}
  void step(std::span<double> params, const ParamVector& g) override {
    if (velocity_.size() != params.size()) velocity_.assign(params.size(), 0.0);
    for (std::size_t i = 0; i < params.size(); ++i) {
      velocity_[i] = momentum_ * velocity_[i] + g[i];
      params[i] += lr_ * velocity_[i];
    }
  }

 private:
  double lr_;
  double momentum_;
  std::vector<double> velocity_;
};

class Adam final : public Optimizer {
 public:
  explicit Adam(const OptimizerConfig& c) : c_(c) {}
  void step(std::span<double> params, const ParamVector& g) override {
    if (m_.size() != params.size()) {
      m_.assign(params.size(), 0.0);
      v_.assign(params.size(), 0.0);
    }
    ++t_;
    const double b1t = 1.0 - std::pow(c_.beta1, static_cast<double>(t_));
    const double b2t = 1.0 - std::pow(c_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i] = c_.beta1 * m_[i] + (1.0 - c_.beta1) * g[i];
      v_[i] = c_.beta2 * v_[i] + (1.0 - c_.beta2) * g[i] * g[i];
      params[i] += c_.lr * (m_[i] / b1t) / (std::sqrt(v_[i] / b2t) + c_.eps);
    }
  }

 private:
  OptimizerConfig c_;
  std::vector<double> m_, v_;
  long t_ = 0;
};

// d kl_term / d logp_current.
double kl_derivative(double logp_current, double logp_ref) {
  const double d = logp_ref - logp_current;
  if (d <= -kLogRatioClamp || d >= kLogRatioClamp) return 0.0;
  return -std::expm1(d);
}

}  // namespace

void GrpoHyperparams::validate() const {
  if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be > 0");
  if (!(beta >= 0.0)) throw InvalidArgument("beta must be >= 0");
  if (mu < 1) throw InvalidArgument("mu must be >= 1");
  if (group_size < 2) throw InvalidArgument("group size K must be >= 2");
}

std::vector<double> compute_advantages(std::span<const double> rewards) {
  const std::size_t k = rewards.size();
  if (k < 2) throw GroupTooSmall("a group needs at least 2 rewards, got " + std::to_string(k));
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= static_cast<double>(k);
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  var /= static_cast<double>(k);
  const double sd = std::sqrt(var);
  std::vector<double> adv(k, 0.0);
  if (sd < kZeroStd) return adv;
  for (std::size_t i = 0; i < k; ++i) adv[i] = (rewards[i] - mean) / sd;
  return adv;
}

void standardize_group(Group& group) {
  std::vector<double> rewards;
  rewards.reserve(group.rollouts.size());
  for (const auto& r : group.rollouts) rewards.push_back(r.reward.total);
  group.advantages = compute_advantages(rewards);
}

double kl_term(double logp_current, double logp_ref) {
  const double d = std::clamp(logp_ref - logp_current, -kLogRatioClamp, kLogRatioClamp);
  // exp(d) - d - 1 without cancellation near d = 0.
  return std::expm1(d) - d;
}

RolloutTerms rollout_terms(const Rollout& r, double advantage, const GrpoHyperparams& hp) {
  RolloutTerms t;
  t.ratio = std::exp(r.logp_current - r.logp_old);
  const double clipped_ratio = std::clamp(t.ratio, 1.0 - hp.epsilon, 1.0 + hp.epsilon);
  const double plain = t.ratio * advantage;
  const double clipped = clipped_ratio * advantage;
  t.clipped = clipped < plain;
  t.surrogate = std::min(plain, clipped);
  t.kl = kl_term(r.logp_current, r.logp_ref);
  return t;
}

double grpo_objective(const Group& group, const GrpoHyperparams& hp) {
  const std::size_t k = group.rollouts.size();
  if (group.advantages.size() != k) throw InvalidArgument("group advantages not computed");
  if (k == 0) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const auto t = rollout_terms(group.rollouts[i], group.advantages[i], hp);
    sum += t.surrogate - hp.beta * t.kl;
  }
  return sum / static_cast<double>(k);
}

double batch_objective(std::span<const Group> batch, const GrpoHyperparams& hp) {
  if (batch.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& g : batch) sum += grpo_objective(g, hp);
  return sum / static_cast<double>(batch.size());
}

namespace {

void accumulate_group_gradient(const Group& group, const GrpoHyperparams& hp,
                               const ToyPolicy& policy, double weight, ParamVector& grad) {
  const std::size_t k = group.rollouts.size();
  if (group.advantages.size() != k) throw InvalidArgument("group advantages not computed");
  for (std::size_t i = 0; i < k; ++i) {
    const Rollout& r = group.rollouts[i];
    const double fresh = policy.logprob(group.query, r.tokens);
    if (std::abs(fresh - r.logp_current) > kMismatchTolerance) {
      throw PolicyMismatch("rollout " + std::to_string(i) + " of query " + r.query_id +
                           ": stored logp_current " + std::to_string(r.logp_current) +
                           " but policy gives " + std::to_string(fresh));
    }
    const auto t = rollout_terms(r, group.advantages[i], hp);
    // d(ratio * A)/dtheta = ratio * A * dlogp; the clipped branch is constant.
    double coeff = t.clipped ? 0.0 : t.ratio * group.advantages[i];
    coeff -= hp.beta * kl_derivative(r.logp_current, r.logp_ref);
    policy.add_logprob_gradient(group.query, r.tokens, weight * coeff / static_cast<double>(k),
                                grad);
  }
}

}  // namespace

ParamVector grpo_objective_gradient(const Group& group, const GrpoHyperparams& hp,
                                    const ToyPolicy& policy) {
  ParamVector grad(policy.num_params(), 0.0);
  accumulate_group_gradient(group, hp, policy, 1.0, grad);
  return grad;
}

ParamVector batch_objective_gradient(std::span<const Group> batch, const GrpoHyperparams& hp,
                                     const ToyPolicy& policy) {
  ParamVector grad(policy.num_params(), 0.0);
  if (batch.empty()) return grad;
  const double weight = 1.0 / static_cast<double>(batch.size());
  for (const auto& g : batch) accumulate_group_gradient(g, hp, policy, weight, grad);
  return grad;
}

void refresh_current_logprobs(std::span<Group> batch, const ToyPolicy& policy) {
  for (auto& g : batch) {
    for (auto& r : g.rollouts) r.logp_current = policy.logprob(g.query, r.tokens);
  }
}

BatchStats batch_stats(std::span<const Group> batch, const GrpoHyperparams& hp) {
  BatchStats s;
  std::size_t n = 0;
  std::size_t clipped = 0;
  for (const auto& g : batch) {
    for (std::size_t i = 0; i < g.rollouts.size(); ++i) {
      const auto t = rollout_terms(g.rollouts[i], g.advantages[i], hp);
      s.mean_kl += t.kl;
      s.mean_abs_advantage += std::abs(g.advantages[i]);
      clipped += t.clipped ? 1 : 0;
      ++n;
    }
  }
  if (n > 0) {
    s.mean_kl /= static_cast<double>(n);
    s.mean_abs_advantage /= static_cast<double>(n);
    s.clip_fraction = static_cast<double>(clipped) / static_cast<double>(n);
  }
  s.objective = batch_objective(batch, hp);
  return s;
}

std::unique_ptr<Optimizer> make_optimizer(const OptimizerConfig& cfg) {
  if (!(cfg.lr >= 0.0)) throw InvalidArgument("learning rate must be >= 0");
  switch (cfg.kind) {
    case OptimizerConfig::Kind::kSgd: return std::make_unique<Sgd>(cfg.lr);
    case OptimizerConfig::Kind::kMomentum: return std::make_unique<Momentum>(cfg.lr, cfg.momentum);
    case OptimizerConfig::Kind::kAdam: return std::make_unique<Adam>(cfg);
  }
  throw InvalidArgument("unknown optimizer");
}

InnerLoopResult inner_update_loop(std::vector<Group>& batch, const GrpoHyperparams& hp,
                                  ToyPolicy& policy, Optimizer& optimizer) {
  hp.validate();
  InnerLoopResult out;
  for (int it = 0; it < hp.mu; ++it) {
    refresh_current_logprobs(batch, policy);
    const BatchStats stats = batch_stats(batch, hp);
    if (it == 0) out.initial = stats;
    out.objectives.push_back(stats.objective);
    const ParamVector grad = batch_objective_gradient(batch, hp, policy);
    optimizer.step(policy.params(), grad);
  }
  refresh_current_logprobs(batch, policy);
  out.final = batch_stats(batch, hp);
  out.objectives.push_back(out.final.objective);
  return out;
}

}  // namespace relgrpo
