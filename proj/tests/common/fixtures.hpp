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

#include <cmath>
#include <string>
#include <vector>

#include "core/grpo.hpp"
#include "core/policy.hpp"
#include "core/rng.hpp"

namespace relgrpo::testing {

inline ToyPolicy random_policy(std::size_t feature_dim, std::vector<std::size_t> vocab, Rng& rng,
                               double scale = 0.5) {
  ToyPolicy p(feature_dim, std::move(vocab));
  for (double& w : p.params()) w = scale * rng.normal();
  return p;
}

inline Query random_query(std::size_t feature_dim, Rng& rng, const std::string& id = "q") {
  Query q;
  q.query_id = id;
  q.features.resize(feature_dim);
  for (double& x : q.features) x = rng.normal();
  return q;
}

inline TokenSeq random_tokens(const ToyPolicy& p, Rng& rng) {
  TokenSeq t(p.positions());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<int>(rng.index(p.vocab(i)));
  return t;
}

// A group whose old/ref log-probs sit at random offsets from the current policy.
// Ratios within `margin` of a clip boundary are redrawn so finite differences
// never straddle a kink.
inline Group random_group(const ToyPolicy& p, std::size_t k, double epsilon, Rng& rng,
                          double margin = 1e-3) {
  Group g;
  g.query = random_query(p.feature_dim(), rng);
  std::vector<double> rewards;
  for (std::size_t i = 0; i < k; ++i) {
    Rollout r;
    r.query_id = g.query.query_id;
    r.tokens = random_tokens(p, rng);
    r.logp_current = p.logprob(g.query, r.tokens);
    for (;;) {
      const double shift = 0.3 * rng.normal();
      const double ratio = std::exp(shift);
      if (std::abs(ratio - (1.0 - epsilon)) > margin && std::abs(ratio - (1.0 + epsilon)) > margin) {
        r.logp_old = r.logp_current - shift;
        break;
      }
    }
    r.logp_ref = r.logp_current + 0.5 * rng.normal();
    r.reward.total = static_cast<double>(rng.index(4));
    rewards.push_back(r.reward.total);
    g.rollouts.push_back(r);
  }
  g.advantages = compute_advantages(rewards);
  return g;
}

// Five-point central-difference gradient of the group objective in the policy parameters.
inline ParamVector numeric_gradient(const Group& group, const GrpoHyperparams& hp,
                                    const ToyPolicy& policy, double h = 1e-4) {
  ToyPolicy work = policy;
  Group g = group;
  ParamVector grad(policy.num_params(), 0.0);
  auto eval = [&] {
    for (auto& r : g.rollouts) r.logp_current = work.logprob(g.query, r.tokens);
    return grpo_objective(g, hp);
  };
  for (std::size_t i = 0; i < grad.size(); ++i) {
    const double saved = work.params()[i];
    auto at = [&](double offset) {
      work.params()[i] = saved + offset;
      return eval();
    };
    grad[i] = (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12.0 * h);
    work.params()[i] = saved;
  }
  return grad;
}

// Largest componentwise relative error, with a floor for near-zero entries.
inline double max_relative_error(const ParamVector& a, const ParamVector& b, double floor = 1e-6) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double scale = std::max({std::abs(a[i]), std::abs(b[i]), floor});
    worst = std::max(worst, std::abs(a[i] - b[i]) / scale);
  }
  return worst;
}

}  // namespace relgrpo::testing
