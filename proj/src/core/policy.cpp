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

#include "core/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "core/error.hpp"
#include "core/reward.hpp"

namespace relgrpo {

namespace {

constexpr const char* kCheckpointFormat = "relgrpo-toy-policy";
constexpr int kCheckpointVersion = 1;

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::vector<double> log_softmax_of(std::vector<double> z) {
  const double m = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double v : z) sum += std::exp(v - m);
  const double lse = m + std::log(sum);
  for (double& v : z) v -= lse;
  return z;
}

}  // namespace

ToyPolicy::ToyPolicy(std::size_t feature_dim, std::vector<std::size_t> vocab_sizes)
    : feature_dim_(feature_dim), vocab_(std::move(vocab_sizes)) {
  if (feature_dim_ == 0) throw InvalidArgument("feature dimension must be positive");
  std::size_t total = 0;
  for (std::size_t v : vocab_) {
    if (v == 0) throw InvalidArgument("empty vocabulary");
    offset_.push_back(total);
    total += v * feature_dim_;
  }
  params_.assign(total, 0.0);
}

ToyPolicy ToyPolicy::for_task(std::size_t feature_dim, std::size_t step_vocab,
                              std::size_t num_labels) {
  std::vector<std::size_t> vocab(kSequenceLength, step_vocab);
  vocab[kAnswerPosition] = num_labels;
  return ToyPolicy(feature_dim, std::move(vocab));
}

std::span<const double> ToyPolicy::weights(std::size_t p) const {
  return std::span<const double>(params_).subspan(offset_[p], vocab_[p] * feature_dim_);
}

std::span<double> ToyPolicy::weights(std::size_t p) {
  return std::span<double>(params_).subspan(offset_[p], vocab_[p] * feature_dim_);
}

std::vector<double> ToyPolicy::logits(std::size_t p, std::span<const double> features) const {
  const auto w = weights(p);
  std::vector<double> z(vocab_[p]);
  for (std::size_t v = 0; v < vocab_[p]; ++v) {
    z[v] = dot(w.subspan(v * feature_dim_, feature_dim_), features);
  }
  return z;
}

std::vector<double> ToyPolicy::log_softmax(std::size_t p, std::span<const double> features) const {
  return log_softmax_of(logits(p, features));
}

void ToyPolicy::check(const Query& q, std::span<const int> tokens) const {
  if (q.features.size() != feature_dim_) {
    throw InvalidArgument("query " + q.query_id + " has " + std::to_string(q.features.size()) +
                          " features, policy expects " + std::to_string(feature_dim_));
  }
  if (tokens.size() != vocab_.size()) {
    throw InvalidToken("expected " + std::to_string(vocab_.size()) + " tokens, got " +
                       std::to_string(tokens.size()));
  }
  for (std::size_t p = 0; p < tokens.size(); ++p) {
    if (tokens[p] < 0 || static_cast<std::size_t>(tokens[p]) >= vocab_[p]) {
      throw InvalidToken("token " + std::to_string(tokens[p]) + " out of range at position " +
                         std::to_string(p));
    }
  }
}

SampledSequence ToyPolicy::sample(const Query& q, double temperature, Rng& rng) const {
  if (q.features.size() != feature_dim_) {
    throw InvalidArgument("query " + q.query_id + " has wrong feature dimension");
  }
  if (temperature < 0.0) throw InvalidArgument("temperature must be >= 0");
  SampledSequence out;
  out.tokens.resize(vocab_.size());
  for (std::size_t p = 0; p < vocab_.size(); ++p) {
    const auto z = logits(p, q.features);
    const auto logp = log_softmax_of(z);
    std::size_t pick = 0;
    if (temperature == 0.0) {
      pick = static_cast<std::size_t>(std::max_element(z.begin(), z.end()) - z.begin());
    } else {
      std::vector<double> scaled(z.size());
      for (std::size_t v = 0; v < z.size(); ++v) scaled[v] = z[v] / temperature;
      const auto lt = log_softmax_of(std::move(scaled));
      std::vector<double> prob(lt.size());
      for (std::size_t v = 0; v < lt.size(); ++v) prob[v] = std::exp(lt[v]);
      pick = rng.categorical(prob);
    }
    out.tokens[p] = static_cast<int>(pick);
    out.logp += logp[pick];
  }
  return out;
}

double ToyPolicy::logprob(const Query& q, std::span<const int> tokens) const {
  check(q, tokens);
  double total = 0.0;
  for (std::size_t p = 0; p < tokens.size(); ++p) {
    total += log_softmax(p, q.features)[static_cast<std::size_t>(tokens[p])];
  }
  return total;
}

void ToyPolicy::add_logprob_gradient(const Query& q, std::span<const int> tokens, double scale,
                                     ParamVector& grad) const {
  check(q, tokens);
  if (grad.size() != params_.size()) throw InvalidArgument("gradient buffer has wrong size");
  if (scale == 0.0) return;
  for (std::size_t p = 0; p < tokens.size(); ++p) {
    const auto logp = log_softmax(p, q.features);
    double* g = grad.data() + offset_[p];
    for (std::size_t v = 0; v < vocab_[p]; ++v) {
      const double coeff =
          scale * ((static_cast<int>(v) == tokens[p] ? 1.0 : 0.0) - std::exp(logp[v]));
      if (coeff == 0.0) continue;
      double* row = g + v * feature_dim_;
      for (std::size_t f = 0; f < feature_dim_; ++f) row[f] += coeff * q.features[f];
    }
  }
}

Json ToyPolicy::to_json() const {
  Json j;
  j["feature_dim"] = feature_dim_;
  Json positions = Json::array();
  for (std::size_t p = 0; p < vocab_.size(); ++p) {
    const auto w = weights(p);
    positions.push_back(Json{{"vocab", vocab_[p]},
                             {"shape", {vocab_[p], feature_dim_}},
                             {"weights", std::vector<double>(w.begin(), w.end())}});
  }
  j["positions"] = std::move(positions);
  return j;
}

ToyPolicy ToyPolicy::from_json(const Json& j) {
  try {
    const auto feature_dim = j.at("feature_dim").get<std::size_t>();
    std::vector<std::size_t> vocab;
    for (const auto& pos : j.at("positions")) vocab.push_back(pos.at("vocab").get<std::size_t>());
    ToyPolicy policy(feature_dim, vocab);
    std::size_t p = 0;
    for (const auto& pos : j.at("positions")) {
      const auto w = pos.at("weights").get<std::vector<double>>();
      if (w.size() != vocab[p] * feature_dim) {
        throw ParseError("checkpoint position " + std::to_string(p) + " has " +
                         std::to_string(w.size()) + " weights");
      }
      std::copy(w.begin(), w.end(), policy.weights(p).begin());
      ++p;
    }
    return policy;
  } catch (const Json::exception& e) {
    throw ParseError(std::string("malformed checkpoint: ") + e.what());
  }
}

SampledSequence sample_sequence(const SequencePolicy& policy, const Query& q, double temperature,
                                Rng& rng) {
  return policy.sample(q, temperature, rng);
}

double sequence_logprob(const SequencePolicy& policy, const Query& q, std::span<const int> tokens) {
  return policy.logprob(q, tokens);
}

ParamVector logprob_gradient(const ToyPolicy& policy, const Query& q, std::span<const int> tokens) {
  ParamVector grad(policy.num_params(), 0.0);
  policy.add_logprob_gradient(q, tokens, 1.0, grad);
  return grad;
}

Phrasebook Phrasebook::make(std::size_t step_vocab, std::size_t clue_len,
                            std::size_t distractor_len) {
  if (step_vocab == 0) throw InvalidArgument("step vocabulary must be non-empty");
  Phrasebook book;
  for (int p = 0; p < kReasoningSteps; ++p) {
    std::vector<std::string> slot;
    for (std::size_t v = 0; v < step_vocab; ++v) {
      const bool clue = v == 0;
      std::string head = (clue ? "clue" : "noise") + std::to_string(p + 1) + "." + std::to_string(v);
      const std::size_t len = std::max(clue ? clue_len : distractor_len, head.size());
      head.resize(len, clue ? '+' : '-');
      slot.push_back(std::move(head));
    }
    book.phrases.push_back(std::move(slot));
  }
  return book;
}

int Phrasebook::token_of(std::size_t p, std::string_view phrase) const {
  if (p >= phrases.size()) return -1;
  const auto& slot = phrases[p];
  for (std::size_t v = 0; v < slot.size(); ++v) {
    if (slot[v] == phrase) return static_cast<int>(v);
  }
  return -1;
}

std::string render_text(std::span<const int> tokens, const Phrasebook& book,
                        const LabelInventory& inv) {
  if (tokens.size() != kSequenceLength || book.phrases.size() != kReasoningSteps) {
    throw InvalidToken("render_text expects " + std::to_string(kSequenceLength) + " tokens");
  }
  std::string out = "<think>";
  for (int p = 0; p < kReasoningSteps; ++p) {
    const auto& slot = book.phrases[p];
    if (tokens[p] < 0 || static_cast<std::size_t>(tokens[p]) >= slot.size()) {
      throw InvalidToken("step token out of range at position " + std::to_string(p));
    }
    out += " Step " + std::to_string(p + 1) + ": ";
    out += slot[static_cast<std::size_t>(tokens[p])];
  }
  const int answer = tokens[kAnswerPosition];
  if (answer < 0 || static_cast<std::size_t>(answer) >= inv.size()) {
    throw InvalidToken("answer token out of range");
  }
  out += " </think> <answer>";
  out += inv.at(static_cast<std::size_t>(answer)).canonical();
  out += "</answer>";
  return out;
}

double mean_nll(const ToyPolicy& policy, std::span<const Demo> demos) {
  if (demos.empty()) return 0.0;
  double total = 0.0;
  for (const auto& d : demos) total -= policy.logprob(d.query, d.tokens);
  return total / static_cast<double>(demos.size());
}

std::vector<double> sft_train(ToyPolicy& policy, std::span<const Demo> demos,
                              const SftOptions& opt) {
  if (demos.empty()) throw InvalidArgument("sft_train needs at least one demonstration");
  std::vector<std::size_t> order(demos.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const std::size_t batch = opt.batch_size == 0 ? demos.size() : opt.batch_size;
  Rng rng = Rng::derive(opt.seed, {0x5f7});
  std::vector<double> history;
  ParamVector grad(policy.num_params());
  for (std::size_t epoch = 0; epoch < opt.epochs; ++epoch) {
    if (batch < demos.size()) rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      std::fill(grad.begin(), grad.end(), 0.0);
      const double scale = 1.0 / static_cast<double>(end - start);
      for (std::size_t i = start; i < end; ++i) {
        const Demo& d = demos[order[i]];
        policy.add_logprob_gradient(d.query, d.tokens, scale, grad);
      }
      // Descent on NLL is ascent on log-likelihood.
      auto params = policy.params();
      for (std::size_t k = 0; k < params.size(); ++k) params[k] += opt.lr * grad[k];
    }
    history.push_back(mean_nll(policy, demos));
  }
  return history;
}

void save_checkpoint(const std::filesystem::path& path, const ToyPolicy& policy,
                     const std::string& tag) {
  Json j = policy.to_json();
  j["format"] = kCheckpointFormat;
  j["version"] = kCheckpointVersion;
  j["tag"] = tag;
  write_json(path, j);
}

ToyPolicy load_checkpoint(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw MissingCheckpoint("checkpoint not found: " + path.string());
  }
  const Json j = read_json(path);
  if (j.value("format", "") != kCheckpointFormat) {
    throw ParseError(path.string() + " is not a policy checkpoint");
  }
  if (j.value("version", 0) != kCheckpointVersion) {
    throw ParseError(path.string() + ": unsupported checkpoint version");
  }
  return ToyPolicy::from_json(j);
}

}  // namespace relgrpo
