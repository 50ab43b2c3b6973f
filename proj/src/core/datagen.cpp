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

#include "core/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <map>
#include <sstream>

#include "core/reward.hpp"

namespace relgrpo {

namespace {

constexpr const char* kAnswerMarker = "the correct relation label is ";

std::string join(const std::vector<std::string>& items, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

std::string candidate_list(const std::vector<RelationLabel>& labels) {
  std::vector<std::string> names;
  for (const auto& l : labels) names.push_back(l.canonical());
  return join(names, ", ");
}

}  // namespace

std::string AnnotationPrompt::full_text() const {
  return task_description + "\n\n" + stepwise_instruction + "\n\n" + answer_hint;
}

std::string student_prompt(const Sample& sample, const LabelInventory& inv) {
  std::ostringstream os;
  os << "Task: multimodal object-entity relation extraction. You receive an image, a crop of "
        "one object in that image, a sentence, and one entity mentioned in the sentence. "
        "Decide which relation links the object to the entity.\n"
     << "Candidate relation labels: " << candidate_list(inv.labels()) << "\n"
     << "Put your intermediate reasoning inside <think> </think> as \"Step 1: ... Step 6: ...\" "
        "and the final label inside <answer> </answer>.\n"
     << "Input:\n"
     << "  text: " << sample.text << "\n"
     << "  entity: " << sample.entity << " [" << sample.entity_span.first << ", "
     << sample.entity_span.second << ")\n";
  if (sample.image_path) os << "  image: " << *sample.image_path << "\n";
  if (sample.object_bbox) {
    const auto& b = *sample.object_bbox;
    os << "  object box: [" << b[0] << ", " << b[1] << ", " << b[2] << ", " << b[3] << "]\n";
  }
  return os.str();
}

AnnotationPrompt build_annotation_prompt(const Sample& sample, const LabelInventory& inv) {
  const RelationLabel& gold = inv.parse(sample.gold_label);
  AnnotationPrompt p;
  p.task_description = student_prompt(sample, inv);

  std::ostringstream steps;
  steps << "Reason in six steps.\n";
  const char* guidance[6] = {
      "Describe what the image shows and the role of the boxed object.",
      "Judge whether the image and the text talk about related things.",
      "Link the boxed object to the entities mentioned in the text.",
      "Give the type of the object and of the entity, each one of per, org, loc, misc.",
      "Keep only the candidate relations whose types match the ones found in Step 4.",
      "Pick the final relation from the remaining candidates.",
  };
  for (int k = 0; k < 6; ++k) {
    steps << "Step " << (k + 1) << ": " << kStepTitles[k] << ". " << guidance[k];
    if (k == 4 && !gold.is_none) {
      steps << " For an object of type " << entity_type_code(gold.object_type)
            << " and an entity of type " << entity_type_code(gold.entity_type)
            << " the candidates are: "
            << candidate_list(filter_by_types(gold.object_type, gold.entity_type, inv)) << ".";
    }
    steps << "\n";
  }
  p.stepwise_instruction = steps.str();

  std::ostringstream hint;
  if (gold.is_none) {
    hint << "Reference answer: " << kNoRelationHint << ", so " << kAnswerMarker << "none.";
  } else {
    hint << "Reference answer: the object is of type " << entity_type_code(gold.object_type)
         << ", the entity is of type " << entity_type_code(gold.entity_type) << ", and "
         << kAnswerMarker << gold.canonical() << ".";
  }
  hint << " Write reasoning that arrives at this label.";
  p.answer_hint = hint.str();
  return p;
}

bool filter_expert_output(const std::string& raw, const RelationLabel& gold,
                          const LabelInventory& inv) {
  const auto parsed = parse_response(raw);
  return parsed.structure_ok && answer_reward(parsed, gold, inv) == 1.0;
}

std::vector<Sample> stratified_sample(const std::vector<Sample>& dataset, double fraction,
                                      Rng& rng) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw InvalidArgument("sampling fraction must be in (0, 1]");
  }
  std::vector<std::string> order;
  std::map<std::string, std::vector<std::size_t>> by_label;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    auto& bucket = by_label[dataset[i].gold_label];
    if (bucket.empty()) order.push_back(dataset[i].gold_label);
    bucket.push_back(i);
  }
  std::vector<bool> keep(dataset.size(), false);
  for (const auto& label : order) {
    auto idx = by_label[label];
    const auto n = static_cast<std::size_t>(
        std::ceil(fraction * static_cast<double>(idx.size()) - 1e-9));
    rng.shuffle(idx);
    for (std::size_t k = 0; k < n && k < idx.size(); ++k) keep[idx[k]] = true;
  }
  std::vector<Sample> out;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (keep[i]) out.push_back(dataset[i]);
  }
  return out;
}

Json SftRecord::to_json() const {
  return Json{{"sample_id", sample_id}, {"prompt", prompt}, {"target", target}};
}

SftRecord SftRecord::from_json(const Json& j) {
  try {
    return SftRecord{j.at("sample_id").get<std::string>(), j.at("prompt").get<std::string>(),
                     j.at("target").get<std::string>()};
  } catch (const Json::exception& e) {
    throw ParseError(std::string("malformed SFT record: ") + e.what());
  }
}

std::vector<SftRecord> load_sft_records(const std::filesystem::path& path) {
  std::vector<SftRecord> out;
  for (const auto& row : read_jsonl(path)) out.push_back(SftRecord::from_json(row));
  return out;
}

void save_sft_records(const std::filesystem::path& path, const std::vector<SftRecord>& records) {
  std::vector<Json> rows;
  for (const auto& r : records) rows.push_back(r.to_json());
  write_jsonl(path, rows);
}

Json AnnotateStats::to_json() const {
  return Json{{"samples", samples},
              {"requests", requests},
              {"accepted", accepted},
              {"accepted_after_retry", accepted_after_retry},
              {"dropped", dropped},
              {"acceptance_rate", acceptance_rate()}};
}

namespace {

struct SampleOutcome {
  std::optional<SftRecord> record;
  std::size_t requests = 0;
  bool retried = false;
};

SampleOutcome annotate_one(const Sample& s, ExpertClient& client, const LabelInventory& inv,
                           const AnnotateOptions& opt) {
  const RelationLabel& gold = inv.parse(s.gold_label);
  const AnnotationPrompt prompt = build_annotation_prompt(s, inv);
  SampleOutcome out;
  for (int attempt = 0; attempt <= opt.max_rejection_retries; ++attempt) {
    ExpertRequest req{prompt.task_description,
                      prompt.stepwise_instruction + "\n\n" + prompt.answer_hint, attempt};
    const std::string text = client.complete(req);
    ++out.requests;
    if (filter_expert_output(text, gold, inv)) {
      out.record = SftRecord{s.sample_id, prompt.task_description, text};
      out.retried = attempt > 0;
      break;
    }
  }
  return out;
}

}  // namespace

AnnotateResult annotate(const std::vector<Sample>& samples, ExpertClient& client,
                        const LabelInventory& inv, const AnnotateOptions& opt) {
  if (opt.max_rejection_retries < 0) throw InvalidArgument("retries must be >= 0");
  const std::size_t width = static_cast<std::size_t>(std::max(1, opt.concurrency));
  AnnotateResult result;
  result.stats.samples = samples.size();
  auto canonicalize = [](std::vector<SftRecord>& records) {
    std::sort(records.begin(), records.end(),
              [](const SftRecord& a, const SftRecord& b) { return a.sample_id < b.sample_id; });
  };
  for (std::size_t start = 0; start < samples.size(); start += width) {
    const std::size_t end = std::min(samples.size(), start + width);
    std::vector<std::future<SampleOutcome>> wave;
    for (std::size_t i = start; i < end; ++i) {
      wave.push_back(std::async(width == 1 ? std::launch::deferred : std::launch::async,
                                annotate_one, std::cref(samples[i]), std::ref(client),
                                std::cref(inv), std::cref(opt)));
    }
    std::optional<ExpertUnavailable> failure;
    for (auto& f : wave) {
      try {
        const SampleOutcome o = f.get();
        result.stats.requests += o.requests;
        if (o.record) {
          result.records.push_back(*o.record);
          ++result.stats.accepted;
          if (o.retried) ++result.stats.accepted_after_retry;
        } else {
          ++result.stats.dropped;
        }
      } catch (const ExpertUnavailable& e) {
        if (!failure) failure.emplace(e.what());
      }
    }
    if (failure) {
      canonicalize(result.records);
      failure->partial = result.records;
      throw *failure;
    }
  }
  canonicalize(result.records);
  return result;
}

std::optional<TokenSeq> tokenize_target(const std::string& target, const Phrasebook& book,
                                        const LabelInventory& inv) {
  const auto parsed = parse_response(target);
  if (!parsed.structure_ok || !parsed.answer_text) return std::nullopt;
  TokenSeq tokens(kSequenceLength);
  for (int p = 0; p < kReasoningSteps; ++p) {
    tokens[p] = book.token_of(static_cast<std::size_t>(p), parsed.steps[p]);
    if (tokens[p] < 0) return std::nullopt;
  }
  const auto label = inv.find(*parsed.answer_text);
  if (!label) return std::nullopt;
  tokens[kAnswerPosition] = static_cast<int>(*label);
  return tokens;
}

void SyntheticTaskSpec::validate(const LabelInventory& inv) const {
  if (feature_dim <= inv.size()) {
    throw InvalidArgument("feature_dim must exceed the number of labels (" +
                          std::to_string(inv.size()) + ")");
  }
  if (!(none_fraction >= 0.0 && none_fraction < 1.0)) {
    throw InvalidArgument("none_fraction must be in [0, 1)");
  }
  if (!label_weights.empty() && label_weights.size() != inv.size()) {
    throw InvalidArgument("label_weights must have one entry per label");
  }
  for (double w : label_weights) {
    if (!(w >= 0.0)) throw InvalidArgument("label weights must be non-negative");
  }
  for (double r : {hard_rate_none, hard_rate_relation}) {
    if (!(r >= 0.0 && r <= 1.0)) throw InvalidArgument("hard rates must be in [0, 1]");
  }
  if (!(noise >= 0.0)) throw InvalidArgument("noise must be >= 0");
  if (!(none_signal >= 0.0)) throw InvalidArgument("none_signal must be >= 0");
  if (!(confuser_signal < hard_signal && spurious_signal < hard_signal)) {
    throw InvalidArgument("hard_signal must exceed confuser_signal and spurious_signal");
  }
  if (step_vocab < 2) throw InvalidArgument("step_vocab must be >= 2");
  length_threshold(inv);
}

Json SyntheticTaskSpec::to_json() const {
  return Json{{"feature_dim", feature_dim},
              {"num_train", num_train},
              {"num_eval", num_eval},
              {"none_fraction", none_fraction},
              {"label_weights", label_weights},
              {"hard_rate_none", hard_rate_none},
              {"hard_rate_relation", hard_rate_relation},
              {"easy_signal", easy_signal},
              {"hard_signal", hard_signal},
              {"confuser_signal", confuser_signal},
              {"spurious_signal", spurious_signal},
              {"none_signal", none_signal},
              {"noise", noise},
              {"step_vocab", step_vocab},
              {"clue_len", clue_len},
              {"distractor_len", distractor_len}};
}

SyntheticTaskSpec SyntheticTaskSpec::from_json(const Json& j) {
  SyntheticTaskSpec s;
  try {
    s.feature_dim = j.value("feature_dim", s.feature_dim);
    s.num_train = j.value("num_train", s.num_train);
    s.num_eval = j.value("num_eval", s.num_eval);
    s.none_fraction = j.value("none_fraction", s.none_fraction);
    s.label_weights = j.value("label_weights", s.label_weights);
    s.hard_rate_none = j.value("hard_rate_none", s.hard_rate_none);
    s.hard_rate_relation = j.value("hard_rate_relation", s.hard_rate_relation);
    s.easy_signal = j.value("easy_signal", s.easy_signal);
    s.hard_signal = j.value("hard_signal", s.hard_signal);
    s.confuser_signal = j.value("confuser_signal", s.confuser_signal);
    s.spurious_signal = j.value("spurious_signal", s.spurious_signal);
    s.none_signal = j.value("none_signal", s.none_signal);
    s.noise = j.value("noise", s.noise);
    s.step_vocab = j.value("step_vocab", s.step_vocab);
    s.clue_len = j.value("clue_len", s.clue_len);
    s.distractor_len = j.value("distractor_len", s.distractor_len);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("synthetic task: ") + e.what());
  }
  return s;
}

std::vector<double> SyntheticTaskSpec::label_distribution(const LabelInventory& inv) const {
  std::vector<double> p(inv.size(), 0.0);
  if (!label_weights.empty()) {
    double total = 0.0;
    for (double w : label_weights) total += w;
    if (!(total > 0.0)) throw InvalidArgument("label weights sum to zero");
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = label_weights[i] / total;
    return p;
  }
  const double rest = (1.0 - none_fraction) / static_cast<double>(inv.size() - 1);
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = i == inv.none_index() ? none_fraction : rest;
  return p;
}

Phrasebook SyntheticTaskSpec::phrasebook() const {
  return Phrasebook::make(step_vocab, clue_len, distractor_len);
}

std::size_t SyntheticTaskSpec::length_threshold(const LabelInventory& inv) const {
  const Phrasebook book = phrasebook();
  std::size_t shortest = inv.none_index();
  std::size_t longest = inv.none_index();
  for (std::size_t i = 0; i < inv.size(); ++i) {
    if (inv.at(i).canonical().size() < inv.at(shortest).canonical().size()) shortest = i;
    if (inv.at(i).canonical().size() > inv.at(longest).canonical().size()) longest = i;
  }
  // Five clue steps with the shortest label versus four with the longest.
  TokenSeq five(kSequenceLength, 0), four(kSequenceLength, 0);
  five[5] = 1;
  four[4] = four[5] = 1;
  five[kAnswerPosition] = static_cast<int>(shortest);
  four[kAnswerPosition] = static_cast<int>(longest);
  const std::size_t lo = text_length(render_text(four, book, inv));
  const std::size_t hi = text_length(render_text(five, book, inv));
  if (hi <= lo + 1) {
    throw InvalidArgument("clue and distractor phrase lengths are too close to separate by length");
  }
  return hi - 1;
}

SyntheticTask generate_synthetic_task(const SyntheticTaskSpec& spec, const LabelInventory& inv,
                                      std::uint64_t seed) {
  spec.validate(inv);
  const std::size_t n_labels = inv.size();
  const std::size_t dim = spec.feature_dim;
  SyntheticTask task;

  // Orthonormal prototypes (Gram-Schmidt) over dimensions 1..dim-1.
  Rng proto_rng = Rng::derive(seed, {1});
  task.prototypes.assign(n_labels, std::vector<double>(dim, 0.0));
  std::vector<std::vector<double>> basis;
  for (std::size_t y = 0; y < n_labels; ++y) {
    std::vector<double> v(dim, 0.0);
    for (;;) {
      for (std::size_t f = 1; f < dim; ++f) v[f] = proto_rng.normal();
      for (const auto& b : basis) {
        double d = 0.0;
        for (std::size_t f = 1; f < dim; ++f) d += v[f] * b[f];
        for (std::size_t f = 1; f < dim; ++f) v[f] -= d * b[f];
      }
      double norm = 0.0;
      for (std::size_t f = 1; f < dim; ++f) norm += v[f] * v[f];
      norm = std::sqrt(norm);
      if (norm > 1e-6) {
        for (std::size_t f = 1; f < dim; ++f) v[f] /= norm;
        break;
      }
    }
    basis.push_back(v);
    task.prototypes[y] = v;
  }

  // Confusable partners: random pairing of the non-none labels.
  std::vector<LabelIndex> relations;
  for (std::size_t y = 0; y < n_labels; ++y) {
    if (y != inv.none_index()) relations.push_back(y);
  }
  proto_rng.shuffle(relations);
  task.confuser.assign(n_labels, inv.none_index());
  for (std::size_t i = 0; i + 1 < relations.size(); i += 2) {
    task.confuser[relations[i]] = relations[i + 1];
    task.confuser[relations[i + 1]] = relations[i];
  }
  if (relations.size() % 2 == 1 && relations.size() > 1) {
    task.confuser[relations.back()] = relations.front();
  }

  const auto dist = spec.label_distribution(inv);
  const Phrasebook book = spec.phrasebook();

  auto make = [&](const std::string& split, std::uint64_t stream, std::size_t i) {
    Rng rng = Rng::derive(seed, {stream, i});
    const LabelIndex y = rng.categorical(dist);
    const RelationLabel& label = inv.at(y);
    const bool is_none = label.is_none;
    const bool hard = rng.uniform() < (is_none ? spec.hard_rate_none : spec.hard_rate_relation);

    std::vector<double> x(dim, 0.0);
    x[0] = 1.0;
    for (std::size_t f = 1; f < dim; ++f) x[f] = spec.noise * rng.normal();
    auto add = [&](LabelIndex label_idx, double scale) {
      for (std::size_t f = 1; f < dim; ++f) x[f] += scale * task.prototypes[label_idx][f];
    };
    if (!is_none && !hard) add(y, spec.easy_signal);
    if (!is_none && hard) {
      add(y, spec.hard_signal);
      add(task.confuser[y], spec.confuser_signal);
    }
    if (is_none && !hard) add(y, spec.none_signal);
    if (is_none && hard) add(relations[rng.index(relations.size())], spec.spurious_signal);

    Sample s;
    char id[32];
    std::snprintf(id, sizeof(id), "%s-%05zu", split.c_str(), i);
    s.sample_id = id;
    const auto obj = is_none ? kAllEntityTypes[rng.index(4)] : label.object_type;
    const auto ent = is_none ? kAllEntityTypes[rng.index(4)] : label.entity_type;
    s.entity = "E" + std::to_string(i);
    s.text = "Synthetic report " + s.sample_id + " shows a " + std::string(entity_type_code(obj)) +
             " object next to " + s.entity + " (" + std::string(entity_type_code(ent)) + ").";
    const auto at = s.text.find(s.entity);
    s.entity_span = {static_cast<int>(at), static_cast<int>(at + s.entity.size())};
    s.image_path = "synthetic://" + s.sample_id;
    s.features = std::move(x);
    s.gold_label = label.canonical();
    s.difficulty = hard ? "hard" : "easy";
    return s;
  };

  for (std::size_t i = 0; i < spec.num_train; ++i) task.train.push_back(make("train", 2, i));
  for (std::size_t i = 0; i < spec.num_eval; ++i) task.eval.push_back(make("eval", 3, i));

  for (const auto& s : task.train) {
    TokenSeq gold(kSequenceLength, 0);
    gold[kAnswerPosition] = static_cast<int>(*inv.find(s.gold_label));
    task.demos.push_back(SftRecord{s.sample_id, student_prompt(s, inv), render_text(gold, book, inv)});
  }
  return task;
}

}  // namespace relgrpo
