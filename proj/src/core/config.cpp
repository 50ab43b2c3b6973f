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

#include "core/config.hpp"

#include "core/error.hpp"

namespace relgrpo {

namespace {

// Copies known keys out of a section and rejects anything else.
class Section {
 public:
  Section(const Json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw ConfigError("config section '" + name_ + "' must be an object");
  }

  template <typename T>
  Section& get(const char* key, T& out) {
    seen_.push_back(key);
    if (!j_.contains(key)) return *this;
    try {
      out = j_.at(key).get<T>();
    } catch (const Json::exception& e) {
      throw ConfigError("config key '" + name_ + key + "': " + e.what());
    }
    return *this;
  }

  void done() const {
    for (const auto& [k, v] : j_.items()) {
      if (std::find(seen_.begin(), seen_.end(), k) == seen_.end()) {
        throw ConfigError("unknown config key '" + name_ + k + "'");
      }
    }
  }

 private:
  const Json& j_;
  std::string name_;
  std::vector<std::string> seen_;
};

const Json& sub(const Json& j, const char* key) {
  static const Json empty = Json::object();
  return j.contains(key) ? j.at(key) : empty;
}

}  // namespace

OptimizerConfig Stage2Config::optimizer_config() const {
  OptimizerConfig c;
  c.lr = lr;
  if (optimizer == "sgd") {
    c.kind = OptimizerConfig::Kind::kSgd;
  } else if (optimizer == "momentum") {
    c.kind = OptimizerConfig::Kind::kMomentum;
  } else if (optimizer == "adam") {
    c.kind = OptimizerConfig::Kind::kAdam;
  } else {
    throw ConfigError("stage2.optimizer must be sgd, momentum or adam");
  }
  return c;
}

RunConfig RunConfig::from_json(const Json& j) {
  RunConfig c;
  Section top(j, "");
  top.get("seed", c.seed).get("ablation_seeds", c.ablation_seeds);
  Json ignore;
  for (const char* s : {"stage1", "stage2", "reward", "expert", "synthetic", "paths"}) {
    top.get(s, ignore);
  }
  top.done();

  Section(sub(j, "stage1"), "stage1.")
      .get("fraction", c.stage1.fraction)
      .get("sft_epochs", c.stage1.sft_epochs)
      .get("lr", c.stage1.lr)
      .get("batch_size", c.stage1.batch_size)
      .done();
  Section(sub(j, "stage2"), "stage2.")
      .get("epochs", c.stage2.epochs)
      .get("batch_size", c.stage2.batch_size)
      .get("group_size", c.stage2.group_size)
      .get("alpha", c.stage2.alpha)
      .get("epsilon", c.stage2.epsilon)
      .get("beta", c.stage2.beta)
      .get("mu", c.stage2.mu)
      .get("lr", c.stage2.lr)
      .get("temperature", c.stage2.temperature)
      .get("mix_mode", c.stage2.mix_mode)
      .get("optimizer", c.stage2.optimizer)
      .get("workers", c.stage2.workers)
      .done();
  Section(sub(j, "reward"), "reward.")
      .get("length_threshold", c.reward.length_threshold)
      .get("lenient_label", c.reward.lenient_label)
      .done();
  Section(sub(j, "expert"), "expert.")
      .get("kind", c.expert.kind)
      .get("url", c.expert.url)
      .get("timeout_seconds", c.expert.timeout_seconds)
      .get("transport_retries", c.expert.transport_retries)
      .get("max_rejection_retries", c.expert.max_rejection_retries)
      .get("concurrency", c.expert.concurrency)
      .get("mock_wrong_rate", c.expert.mock_wrong_rate)
      .done();
  Section(sub(j, "paths"), "paths.")
      .get("dataset", c.paths.dataset)
      .get("eval_dataset", c.paths.eval_dataset)
      .get("inventory", c.paths.inventory)
      .get("sft_records", c.paths.sft_records)
      .get("checkpoints", c.paths.checkpoints)
      .get("logs", c.paths.logs)
      .done();
  const Json& syn = sub(j, "synthetic");
  Section check(syn, "synthetic.");
  const Json known = c.synthetic.to_json();
  for (const auto& [k, v] : known.items()) {
    Json tmp;
    check.get(k.c_str(), tmp);
  }
  check.done();
  c.synthetic = SyntheticTaskSpec::from_json(syn);
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  try {
    return from_json(read_json(path));
  } catch (const ParseError& e) {
    throw ConfigError(e.what());
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
}

Json RunConfig::to_json() const {
  Json j;
  j["seed"] = seed;
  j["ablation_seeds"] = ablation_seeds;
  j["stage1"] = {{"fraction", stage1.fraction},
                 {"sft_epochs", stage1.sft_epochs},
                 {"lr", stage1.lr},
                 {"batch_size", stage1.batch_size}};
  j["stage2"] = {{"epochs", stage2.epochs},       {"batch_size", stage2.batch_size},
                 {"group_size", stage2.group_size}, {"alpha", stage2.alpha},
                 {"epsilon", stage2.epsilon},     {"beta", stage2.beta},
                 {"mu", stage2.mu},               {"lr", stage2.lr},
                 {"temperature", stage2.temperature}, {"mix_mode", stage2.mix_mode},
                 {"optimizer", stage2.optimizer}, {"workers", stage2.workers}};
  j["reward"] = {{"length_threshold", reward.length_threshold},
                 {"lenient_label", reward.lenient_label}};
  j["expert"] = {{"kind", expert.kind},
                 {"url", expert.url},
                 {"timeout_seconds", expert.timeout_seconds},
                 {"transport_retries", expert.transport_retries},
                 {"max_rejection_retries", expert.max_rejection_retries},
                 {"concurrency", expert.concurrency},
                 {"mock_wrong_rate", expert.mock_wrong_rate}};
  j["synthetic"] = synthetic.to_json();
  j["paths"] = {{"dataset", paths.dataset},
                {"eval_dataset", paths.eval_dataset},
                {"inventory", paths.inventory},
                {"sft_records", paths.sft_records},
                {"checkpoints", paths.checkpoints},
                {"logs", paths.logs}};
  return j;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  Json parsed;
  try {
    parsed = Json::parse(value);
  } catch (const Json::exception&) {
    parsed = value;
  }
  Json j = to_json();
  Json* node = &j;
  std::size_t start = 0;
  for (;;) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? dot : dot - start);
    if (!node->is_object() || !node->contains(part)) {
      throw ConfigError("unknown config key '" + key + "'");
    }
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  // Keep strings as strings ("stage2.mix_mode=raw" and "paths.dataset=1.jsonl").
  *node = node->is_string() && !parsed.is_string() ? Json(value) : parsed;
  *this = from_json(j);
}

void RunConfig::validate() const {
  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  need(stage1.fraction > 0.0 && stage1.fraction <= 1.0, "stage1.fraction must be in (0, 1]");
  need(stage1.lr >= 0.0, "stage1.lr must be >= 0");
  need(stage2.epochs >= 0, "stage2.epochs must be >= 0");
  need(stage2.batch_size >= 2, "stage2.batch_size must be >= 2");
  need(stage2.group_size >= 2, "stage2.group_size must be >= 2");
  need(stage2.epsilon > 0.0, "stage2.epsilon must be > 0");
  need(stage2.beta >= 0.0, "stage2.beta must be >= 0");
  need(stage2.mu >= 1, "stage2.mu must be >= 1");
  need(stage2.lr >= 0.0, "stage2.lr must be >= 0");
  need(stage2.temperature >= 0.0, "stage2.temperature must be >= 0");
  need(stage2.workers >= 1, "stage2.workers must be >= 1");
  need(reward.length_threshold > 0, "reward.length_threshold must be > 0");
  need(expert.kind == "mock" || expert.kind == "http", "expert.kind must be mock or http");
  need(expert.kind != "http" || !expert.url.empty(), "expert.url is required for http");
  need(expert.max_rejection_retries >= 0, "expert.max_rejection_retries must be >= 0");
  need(ablation_seeds >= 1, "ablation_seeds must be >= 1");
  try {
    stage2.mode().validate();
    stage2.optimizer_config();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace relgrpo
