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
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "core/jsonl.hpp"
#include "core/relation_schema.hpp"
#include "core/rng.hpp"

namespace relgrpo {

// Six reasoning slots followed by the answer slot.
inline constexpr std::size_t kSequenceLength = 7;
inline constexpr std::size_t kAnswerPosition = kSequenceLength - 1;

using TokenSeq = std::vector<int>;
using ParamVector = std::vector<double>;

// Encoded input for one sample: a fixed-width feature vector standing in for
// the vision/text encoder output, plus the gold answer.
struct Query {
  std::string query_id;
  std::vector<double> features;
  LabelIndex gold = 0;
};

struct SampledSequence {
  TokenSeq tokens;
  double logp = 0.0;
};

// Generation surface the trainer needs from any policy.
class SequencePolicy {
 public:
  virtual ~SequencePolicy() = default;
  // temperature 0 is greedy argmax; logp is always under the untempered policy.
  virtual SampledSequence sample(const Query& q, double temperature, Rng& rng) const = 0;
  virtual double logprob(const Query& q, std::span<const int> tokens) const = 0;
};

// Per position p an independent softmax over W_p * features, W_p of shape
// (vocab_p x F), stored row-major and concatenated in position order.
class ToyPolicy final : public SequencePolicy {
 public:
  ToyPolicy() = default;
  ToyPolicy(std::size_t feature_dim, std::vector<std::size_t> vocab_sizes);

  // Six step slots of step_vocab tokens and one answer slot over the labels.
  static ToyPolicy for_task(std::size_t feature_dim, std::size_t step_vocab, std::size_t num_labels);

  std::size_t feature_dim() const { return feature_dim_; }
  std::size_t positions() const { return vocab_.size(); }
  std::size_t vocab(std::size_t p) const { return vocab_[p]; }
  const std::vector<std::size_t>& vocab_sizes() const { return vocab_; }
  std::size_t num_params() const { return params_.size(); }

  std::span<const double> params() const { return params_; }
  std::span<double> params() { return params_; }
  std::span<const double> weights(std::size_t p) const;
  std::span<double> weights(std::size_t p);
  std::size_t offset(std::size_t p) const { return offset_[p]; }

  // Raw logits and log-probabilities at one position.
  std::vector<double> logits(std::size_t p, std::span<const double> features) const;
  std::vector<double> log_softmax(std::size_t p, std::span<const double> features) const;

  SampledSequence sample(const Query& q, double temperature, Rng& rng) const override;
  double logprob(const Query& q, std::span<const int> tokens) const override;

  // grad += scale * d log p(tokens|q) / dW
  void add_logprob_gradient(const Query& q, std::span<const int> tokens, double scale,
                            ParamVector& grad) const;

  bool same_shape(const ToyPolicy& other) const {
    return feature_dim_ == other.feature_dim_ && vocab_ == other.vocab_;
  }

  Json to_json() const;
  static ToyPolicy from_json(const Json& j);

 private:
  void check(const Query& q, std::span<const int> tokens) const;

  std::size_t feature_dim_ = 0;
  std::vector<std::size_t> vocab_;
  std::vector<std::size_t> offset_;
  ParamVector params_;
};

// Frozen parameter set used as the old or reference policy.
class PolicySnapshot {
 public:
  PolicySnapshot() = default;
  PolicySnapshot(const ToyPolicy& policy, std::string tag)
      : policy_(std::make_shared<const ToyPolicy>(policy)), tag_(std::move(tag)) {}

  const ToyPolicy& policy() const { return *policy_; }
  const std::string& tag() const { return tag_; }
  bool valid() const { return policy_ != nullptr; }

 private:
  std::shared_ptr<const ToyPolicy> policy_;
  std::string tag_;
};

SampledSequence sample_sequence(const SequencePolicy& policy, const Query& q, double temperature,
                                Rng& rng);

// Throws InvalidToken.
double sequence_logprob(const SequencePolicy& policy, const Query& q, std::span<const int> tokens);

ParamVector logprob_gradient(const ToyPolicy& policy, const Query& q, std::span<const int> tokens);

// Text for every step token. phrases[p][v] renders token v at step slot p.
struct Phrasebook {
  std::vector<std::vector<std::string>> phrases;

  // Token 0 of every slot is the clue phrase of clue_len characters, the
  // remaining tokens distractors of distractor_len characters.
  static Phrasebook make(std::size_t step_vocab, std::size_t clue_len, std::size_t distractor_len);

  // Reverse lookup; -1 when unknown.
  int token_of(std::size_t p, std::string_view phrase) const;
};

// Fills the reasoning template; the answer token renders as its canonical label.
std::string render_text(std::span<const int> tokens, const Phrasebook& book,
                        const LabelInventory& inv);

struct Demo {
  Query query;
  TokenSeq tokens;
};

struct SftOptions {
  std::size_t epochs = 1;
  double lr = 0.1;
  // 0 means full batch.
  std::size_t batch_size = 0;
  std::uint64_t seed = 0;
};

// Mean negative log-likelihood per sequence.
double mean_nll(const ToyPolicy& policy, std::span<const Demo> demos);

// Gradient descent on mean_nll. Returns the loss after every epoch.
std::vector<double> sft_train(ToyPolicy& policy, std::span<const Demo> demos, const SftOptions& opt);

void save_checkpoint(const std::filesystem::path& path, const ToyPolicy& policy,
                     const std::string& tag);
ToyPolicy load_checkpoint(const std::filesystem::path& path);

}  // namespace relgrpo
