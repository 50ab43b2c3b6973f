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

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "core/error.hpp"
#include "core/policy.hpp"
#include "core/relation_schema.hpp"
#include "core/rng.hpp"
#include "core/sample.hpp"

namespace relgrpo {

// Section titles of the six-step reasoning instruction.
inline constexpr std::array<const char*, 6> kStepTitles = {
    "Image and object analysis",
    "Cross-modal relevance assessment",
    "Cross-modal alignment",
    "Entity type identification",
    "Preliminary relation type filtering",
    "Precise relation type determination",
};

inline constexpr const char* kNoRelationHint =
    "there is no relation between the given object and entity";

// Expert annotation prompt: task description, stepwise instruction, answer hint.
struct AnnotationPrompt {
  std::string task_description;
  std::string stepwise_instruction;
  std::string answer_hint;

  std::string full_text() const;
};

AnnotationPrompt build_annotation_prompt(const Sample& sample, const LabelInventory& inv);

// Task description only; what the student policy is shown.
std::string student_prompt(const Sample& sample, const LabelInventory& inv);

// Structure is well-formed and the parsed answer equals gold.
bool filter_expert_output(const std::string& raw, const RelationLabel& gold,
                          const LabelInventory& inv);

// Per gold-label category, ceil(fraction * count) samples without replacement.
// Output keeps dataset order.
std::vector<Sample> stratified_sample(const std::vector<Sample>& dataset, double fraction, Rng& rng);

struct SftRecord {
  std::string sample_id;
  std::string prompt;
  std::string target;

  Json to_json() const;
  static SftRecord from_json(const Json& j);
};

std::vector<SftRecord> load_sft_records(const std::filesystem::path& path);
void save_sft_records(const std::filesystem::path& path, const std::vector<SftRecord>& records);

struct ExpertRequest {
  std::string system;
  std::string user;
  // 0 for the first request of a sample, then 1, 2, ... on re-requests.
  int attempt = 0;
};

// Chat-style text generation endpoint. complete() throws ExpertUnavailable.
class ExpertClient {
 public:
  virtual ~ExpertClient() = default;
  virtual std::string complete(const ExpertRequest& request) = 0;
};

class ExpertUnavailable : public Error {
 public:
  explicit ExpertUnavailable(const std::string& what)
      : Error(ErrorCode::kExpertUnavailable, what) {}
  // Records accepted before the failure, in canonical order.
  std::vector<SftRecord> partial;
};

// Scripted, deterministic stand-in for the expert: reasons toward the label in
// the answer hint using the phrasebook's clue phrases, and answers a different
// label with probability wrong_rate (a pure function of request and seed).
class MockExpertClient final : public ExpertClient {
 public:
  MockExpertClient(const LabelInventory& inv, Phrasebook book, double wrong_rate = 0.0,
                   std::uint64_t seed = 0);
  std::string complete(const ExpertRequest& request) override;

 private:
  LabelInventory inv_;
  Phrasebook book_;
  double wrong_rate_;
  std::uint64_t seed_;
};

// POST {"system","user"} as JSON to url, expects {"text"}.
class HttpExpertClient final : public ExpertClient {
 public:
  HttpExpertClient(std::string url, double timeout_seconds, int transport_retries);
  std::string complete(const ExpertRequest& request) override;

 private:
  std::string scheme_host_port_;
  std::string path_;
  double timeout_seconds_;
  int transport_retries_;
};

struct AnnotateOptions {
  // Re-requests after a filter rejection before the sample is dropped.
  int max_rejection_retries = 2;
  // Concurrent in-flight requests.
  int concurrency = 1;
};

struct AnnotateStats {
  std::size_t samples = 0;
  std::size_t requests = 0;
  std::size_t accepted = 0;
  std::size_t accepted_after_retry = 0;
  std::size_t dropped = 0;

  double acceptance_rate() const {
    return samples == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(samples);
  }
  Json to_json() const;
};

struct AnnotateResult {
  std::vector<SftRecord> records;
  AnnotateStats stats;
};

// Prompts the expert per sample and keeps filter-accepted responses, sorted by
// sample_id. Throws ExpertUnavailable (with partial results) when the client fails.
AnnotateResult annotate(const std::vector<Sample>& samples, ExpertClient& client,
                        const LabelInventory& inv, const AnnotateOptions& opt);

// Maps an accepted target back to toy-policy tokens; nullopt when a step
// phrase is not in the phrasebook or the answer is not in the inventory.
std::optional<TokenSeq> tokenize_target(const std::string& target, const Phrasebook& book,
                                        const LabelInventory& inv);

// Knobs of the synthetic relation task. Feature 0 is a constant 1; every label
// owns an orthonormal prototype direction in the remaining dimensions. Easy none
// samples carry none_signal along the none prototype, hard none samples only a
// spurious relation direction.
struct SyntheticTaskSpec {
  std::size_t feature_dim = 32;
  std::size_t num_train = 2000;
  std::size_t num_eval = 500;
  // Probability mass of none; the rest is spread uniformly. A non-empty
  // label_weights (one per label, inventory order) replaces both.
  double none_fraction = 0.5;
  std::vector<double> label_weights;
  // P(hard | none) and P(hard | non-none).
  double hard_rate_none = 0.1;
  double hard_rate_relation = 0.4;
  double easy_signal = 3.0;
  double hard_signal = 1.4;
  double confuser_signal = 0.7;
  double spurious_signal = 0.8;
  double none_signal = 0.0;
  double noise = 0.4;
  std::size_t step_vocab = 3;
  std::size_t clue_len = 40;
  std::size_t distractor_len = 4;

  void validate(const LabelInventory& inv) const;
  Json to_json() const;
  static SyntheticTaskSpec from_json(const Json& j);
  // Normalized label distribution in inventory order.
  std::vector<double> label_distribution(const LabelInventory& inv) const;
  Phrasebook phrasebook() const;
  // Threshold under which the length reward fires iff at least five steps use clue phrases.
  std::size_t length_threshold(const LabelInventory& inv) const;
};

struct SyntheticTask {
  std::vector<Sample> train;
  std::vector<Sample> eval;
  // Gold demonstration for every training sample.
  std::vector<SftRecord> demos;
  // Prototype direction per label (row = label index).
  std::vector<std::vector<double>> prototypes;
  std::vector<LabelIndex> confuser;
};

SyntheticTask generate_synthetic_task(const SyntheticTaskSpec& spec, const LabelInventory& inv,
                                      std::uint64_t seed);

}  // namespace relgrpo
