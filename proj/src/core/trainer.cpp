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

#include "core/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "core/error.hpp"
#include "core/reward.hpp"
#include "core/rng.hpp"

namespace relgrpo {

namespace fs = std::filesystem;

namespace {

enum Stream : std::uint64_t {
  kStreamStage1 = 11,
  kStreamSft = 12,
  kStreamEpoch = 21,
  kStreamRollout = 22,
};

fs::path partial_path(const fs::path& records) {
  fs::path p = records;
  p += ".partial";
  return p;
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

Group make_group(const Query& q, const Sample& s, const PolicySnapshot& old,
                 const PolicySnapshot& ref, const Workspace& ws, Rng rng) {
  const auto& cfg = ws.config();
  const auto& inv = ws.inventory();
  const RelationLabel& gold = inv.at(q.gold);
  Group g;
  g.query = q;
  g.rollouts.reserve(static_cast<std::size_t>(cfg.stage2.group_size));
  for (int k = 0; k < cfg.stage2.group_size; ++k) {
    const SampledSequence seq = old.policy().sample(q, cfg.stage2.temperature, rng);
    Rollout r;
    r.query_id = s.sample_id;
    r.tokens = seq.tokens;
    r.raw_text = render_text(seq.tokens, ws.phrasebook(), inv);
    r.logp_old = seq.logp;
    r.logp_current = seq.logp;
    r.logp_ref = ref.policy().logprob(q, seq.tokens);
    r.reward = composite_reward(r.raw_text, gold, inv, cfg.reward);
    g.rollouts.push_back(std::move(r));
  }
  standardize_group(g);
  return g;
}

// Runs fn(i) for i in [0, n) on up to `workers` threads. Each index writes only its own slot.
template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn fn) {
  const std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, workers)), n);
  if (w <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(w);
  std::vector<std::thread> threads;
  threads.reserve(w);
  for (std::size_t t = 0; t < w; ++t) {
    threads.emplace_back([&, t] {
      try {
        for (std::size_t i = t; i < n; i += w) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : threads) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

Workspace::Workspace(RunConfig cfg, fs::path root)
    : cfg_(std::move(cfg)), root_(std::move(root)) {
  cfg_.validate();
  inv_ = cfg_.paths.inventory.empty() ? LabelInventory::builtin()
                                      : LabelInventory::load_jsonl(resolve(cfg_.paths.inventory));
  try {
    cfg_.synthetic.validate(inv_);
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  book_ = cfg_.synthetic.phrasebook();
}

fs::path Workspace::resolve(const std::string& path) const {
  const fs::path p(path);
  return p.is_absolute() ? p : root_ / p;
}

fs::path Workspace::checkpoint(const std::string& name) const {
  return resolve(cfg_.paths.checkpoints) / name;
}

fs::path Workspace::log(const std::string& name) const { return resolve(cfg_.paths.logs) / name; }

ToyPolicy Workspace::fresh_policy() const {
  return ToyPolicy::for_task(cfg_.synthetic.feature_dim, cfg_.synthetic.step_vocab, inv_.size());
}

std::unique_ptr<ExpertClient> Workspace::make_expert_client() const {
  const auto& e = cfg_.expert;
  if (e.kind == "http") {
    return std::make_unique<HttpExpertClient>(e.url, e.timeout_seconds, e.transport_retries);
  }
  return std::make_unique<MockExpertClient>(inv_, book_, e.mock_wrong_rate, cfg_.seed);
}

std::vector<Sample> select_stage1(const Workspace& ws, const std::vector<Sample>& dataset) {
  Rng rng = Rng::derive(ws.config().seed, {kStreamStage1});
  return stratified_sample(dataset, ws.config().stage1.fraction, rng);
}

Stage1Result run_stage1(const Workspace& ws, const std::vector<Sample>& dataset,
                        ExpertClient* client) {
  const auto& cfg = ws.config();
  const auto& inv = ws.inventory();
  Stage1Result out;

  const std::vector<Sample> chosen = select_stage1(ws, dataset);
  for (const auto& s : chosen) out.sft_ids.push_back(s.sample_id);

  const fs::path records_path = ws.resolve(cfg.paths.sft_records);
  std::vector<SftRecord> records;
  if (fs::exists(records_path)) {
    records = load_sft_records(records_path);
  } else {
    std::unordered_set<std::string> have;
    const fs::path partial = partial_path(records_path);
    if (fs::exists(partial)) {
      records = load_sft_records(partial);
      for (const auto& r : records) have.insert(r.sample_id);
    }
    std::vector<Sample> todo;
    for (const auto& s : chosen) {
      if (!have.count(s.sample_id)) todo.push_back(s);
    }
    if (!todo.empty()) {
      if (client == nullptr) throw InvalidArgument("no expert client and no persisted SFT records");
      AnnotateOptions opt;
      opt.max_rejection_retries = cfg.expert.max_rejection_retries;
      opt.concurrency = cfg.expert.concurrency;
      try {
        AnnotateResult res = annotate(todo, *client, inv, opt);
        out.annotation = res.stats;
        out.annotated = true;
        records.insert(records.end(), res.records.begin(), res.records.end());
      } catch (ExpertUnavailable& e) {
        records.insert(records.end(), e.partial.begin(), e.partial.end());
        std::sort(records.begin(), records.end(),
                  [](const SftRecord& a, const SftRecord& b) { return a.sample_id < b.sample_id; });
        save_sft_records(partial, records);
        throw;
      }
    }
    std::sort(records.begin(), records.end(),
              [](const SftRecord& a, const SftRecord& b) { return a.sample_id < b.sample_id; });
    save_sft_records(records_path, records);
    if (fs::exists(partial)) fs::remove(partial);
  }

  std::unordered_map<std::string, const Sample*> by_id;
  for (const auto& s : chosen) by_id.emplace(s.sample_id, &s);
  std::vector<Demo> demos;
  for (const auto& r : records) {
    const auto it = by_id.find(r.sample_id);
    if (it == by_id.end()) continue;
    auto tokens = tokenize_target(r.target, ws.phrasebook(), inv);
    if (!tokens) {
      ++out.unmapped;
      continue;
    }
    demos.push_back({to_query(*it->second, inv), std::move(*tokens)});
  }
  out.demos = demos.size();

  out.policy = ws.fresh_policy();
  SftOptions sft;
  sft.epochs = cfg.stage1.sft_epochs;
  sft.lr = cfg.stage1.lr;
  sft.batch_size = cfg.stage1.batch_size;
  sft.seed = Rng::derive(cfg.seed, {kStreamSft}).next_u64();
  out.sft_history = sft_train(out.policy, demos, sft);

  save_checkpoint(ws.checkpoint("stage1.json"), out.policy, "stage1");
  write_json(ws.checkpoint("stage1_ids.json"), Json(out.sft_ids));
  return out;
}

std::vector<std::string> load_stage1_ids(const Workspace& ws) {
  const fs::path p = ws.checkpoint("stage1_ids.json");
  if (!fs::exists(p)) throw MissingCheckpoint("missing " + p.string());
  return read_json(p).get<std::vector<std::string>>();
}

std::vector<Sample> rl_pool(const std::vector<Sample>& dataset,
                            const std::vector<std::string>& stage1_ids) {
  const std::unordered_set<std::string> used(stage1_ids.begin(), stage1_ids.end());
  std::vector<Sample> pool;
  for (const auto& s : dataset) {
    if (!used.count(s.sample_id)) pool.push_back(s);
  }
  return pool;
}

Json StepTelemetry::to_json() const {
  return {{"step", step},
          {"epoch", epoch},
          {"queries", queries},
          {"easy", easy},
          {"hard", hard},
          {"deviates", deviates},
          {"mean_reward", mean_reward.total},
          {"mean_format_reward", mean_reward.format},
          {"mean_length_reward", mean_reward.length},
          {"mean_answer_reward", mean_reward.answer},
          {"mean_abs_advantage", mean_abs_advantage},
          {"objective_before", objective_before},
          {"objective_after", objective_after},
          {"mean_kl", mean_kl},
          {"clip_fraction", clip_fraction}};
}

Stage2Result run_stage2(const Workspace& ws, const ToyPolicy& init, const std::vector<Sample>& pool,
                        const Stage2Options& opt) {
  const auto& cfg = ws.config();
  const auto& inv = ws.inventory();
  const GrpoHyperparams hp = cfg.stage2.hyperparams();
  hp.validate();
  const MixMode mode = cfg.stage2.mode();
  mode.validate();
  if (!init.same_shape(ws.fresh_policy())) {
    throw PolicyMismatch("initial policy does not match the configured task shape");
  }

  Stage2Result out;
  out.policy = init;

  std::unordered_map<std::string, const Sample*> by_id;
  std::unordered_set<std::string> none_ids;
  for (const auto& s : pool) {
    if (!by_id.emplace(s.sample_id, &s).second) {
      throw InvalidArgument("duplicate sample id in pool: " + s.sample_id);
    }
    if (inv.index_of(inv.parse(s.gold_label)) == inv.none_index()) none_ids.insert(s.sample_id);
  }
  const double none_fraction =
      pool.empty() ? 0.0 : static_cast<double>(none_ids.size()) / static_cast<double>(pool.size());

  const PolicySnapshot ref(init, "ref");
  out.split = opt.split ? *opt.split
                        : split_by_difficulty(pool, ref, ws.phrasebook(), inv);
  for (const auto* ids : {&out.split.easy_ids, &out.split.hard_ids}) {
    for (const auto& id : *ids) {
      if (!by_id.count(id)) throw InvalidArgument("split id not in pool: " + id);
    }
  }
  out.schedule = epoch_schedule(mode, out.split.easy_ids.size(), out.split.hard_ids.size(),
                                cfg.stage2.batch_size, cfg.stage2.epochs);

  std::ofstream telemetry;
  if (opt.log_dir) {
    fs::create_directories(*opt.log_dir);
    write_text(*opt.log_dir / "difficulty.jsonl", [&] {
      std::string text;
      for (const auto& row : out.split.to_jsonl()) text += row.dump() + "\n";
      return text;
    }());
    std::string sched;
    for (const auto& e : out.schedule) {
      sched += Json{{"epoch", e.plan.epoch},
                    {"mode", mode.name()},
                    {"alpha", mode.alpha},
                    {"batch_easy", e.plan.easy_count},
                    {"batch_hard", e.plan.hard_count},
                    {"easy_total", e.easy_total},
                    {"hard_total", e.hard_total},
                    {"steps", e.steps},
                    {"full_pool", e.full_pool}}
                   .dump() +
               "\n";
    }
    write_text(*opt.log_dir / "schedule.jsonl", sched);
    telemetry.open(*opt.log_dir / "telemetry.jsonl", std::ios::binary | std::ios::trunc);
    if (!telemetry) throw IoError("cannot open telemetry log in " + opt.log_dir->string());
  }

  auto optimizer = make_optimizer(cfg.stage2.optimizer_config());
  int step = 0;
  for (const EpochPlan& plan : out.schedule) {
    const int epoch = plan.plan.epoch;
    EpochSummary summary;
    summary.epoch = epoch;
    summary.plan = plan;
    std::vector<double> epoch_rewards;
    EpochSampler sampler(plan, out.split, none_ids, none_fraction,
                         Rng::derive(cfg.seed, {kStreamEpoch, static_cast<std::uint64_t>(epoch)}));
    while (!sampler.done()) {
      const BatchDraw draw = sampler.next();
      ++step;
      const PolicySnapshot old(out.policy, "old-" + std::to_string(step));

      std::vector<Group> batch(draw.ids.size());
      parallel_for(draw.ids.size(), cfg.stage2.workers, [&](std::size_t i) {
        const Sample& s = *by_id.at(draw.ids[i]);
        batch[i] = make_group(
            to_query(s, inv), s, old, ref, ws,
            Rng::derive(cfg.seed, {kStreamRollout, static_cast<std::uint64_t>(step), i}));
      });

      StepTelemetry t;
      t.step = step;
      t.epoch = epoch;
      t.queries = draw.ids.size();
      t.easy = draw.easy;
      t.hard = draw.hard;
      t.deviates = draw.deviates;
      std::size_t n = 0;
      for (const auto& g : batch) {
        for (const auto& r : g.rollouts) {
          t.mean_reward.format += r.reward.format;
          t.mean_reward.length += r.reward.length;
          t.mean_reward.answer += r.reward.answer;
          t.mean_reward.total += r.reward.total;
          epoch_rewards.push_back(r.reward.total);
          ++n;
        }
      }
      if (n > 0) {
        const double inv_n = 1.0 / static_cast<double>(n);
        t.mean_reward.format *= inv_n;
        t.mean_reward.length *= inv_n;
        t.mean_reward.answer *= inv_n;
        t.mean_reward.total *= inv_n;
      }

      const InnerLoopResult res = inner_update_loop(batch, hp, out.policy, *optimizer);
      t.mean_abs_advantage = res.initial.mean_abs_advantage;
      t.objective_before = res.initial.objective;
      t.objective_after = res.final.objective;
      t.mean_kl = res.final.mean_kl;
      t.clip_fraction = res.final.clip_fraction;
      if (telemetry.is_open()) {
        telemetry << t.to_json().dump() << '\n';
        telemetry.flush();
      }
      out.steps.push_back(t);
      ++summary.steps;
    }
    summary.mean_reward = mean(epoch_rewards);

    if (opt.checkpoint_dir) {
      save_checkpoint(*opt.checkpoint_dir / ("stage2_epoch" + std::to_string(epoch) + ".json"),
                      out.policy, "stage2-epoch" + std::to_string(epoch));
    }
    if (opt.eval) {
      summary.eval = evaluate_checkpoint(out.policy, *opt.eval, ws.phrasebook(), inv);
      if (!out.best || summary.eval->f1 > out.best->f1) {
        out.best = summary.eval;
        out.best_epoch = epoch;
        if (opt.checkpoint_dir) {
          save_checkpoint(*opt.checkpoint_dir / "stage2_best.json", out.policy,
                          "stage2-best-epoch" + std::to_string(epoch));
        }
      }
    }
    out.epochs.push_back(std::move(summary));
  }
  if (opt.checkpoint_dir) {
    save_checkpoint(*opt.checkpoint_dir / "stage2_final.json", out.policy, "stage2-final");
  }
  return out;
}

std::vector<Prediction> greedy_predictions(const ToyPolicy& policy,
                                           const std::vector<Sample>& samples,
                                           const Phrasebook& book, const LabelInventory& inv) {
  Rng unused(0);
  std::vector<Prediction> preds;
  preds.reserve(samples.size());
  for (const auto& s : samples) {
    const auto seq = policy.sample(to_query(s, inv), 0.0, unused);
    const auto parsed = parse_response(render_text(seq.tokens, book, inv));
    preds.push_back(parsed.answer_text ? inv.find(*parsed.answer_text) : std::nullopt);
  }
  return preds;
}

EvalReport evaluate_checkpoint(const ToyPolicy& policy, const std::vector<Sample>& eval,
                               const Phrasebook& book, const LabelInventory& inv) {
  const auto preds = greedy_predictions(policy, eval, book, inv);
  std::vector<LabelIndex> golds;
  golds.reserve(eval.size());
  for (const auto& s : eval) golds.push_back(inv.index_of(inv.parse(s.gold_label)));
  return evaluate(preds, golds, inv);
}

std::vector<Sample> with_difficulty(const std::vector<Sample>& samples, const std::string& tag) {
  std::vector<Sample> out;
  for (const auto& s : samples) {
    if (s.difficulty && *s.difficulty == tag) out.push_back(s);
  }
  return out;
}

}  // namespace relgrpo
