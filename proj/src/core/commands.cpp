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

#include "core/commands.hpp"

#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <map>
#include <sstream>

#include "core/error.hpp"
#include "core/reward.hpp"

namespace relgrpo {

namespace fs = std::filesystem;

namespace {

std::string strf(const char* format, ...) __attribute__((format(printf, 1, 2)));

std::string strf(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

std::vector<Sample> load_dataset(const Workspace& ws) {
  return load_samples(ws.resolve(ws.config().paths.dataset));
}

// The eval set is optional for training commands.
std::vector<Sample> load_eval_if_present(const Workspace& ws) {
  const fs::path p = ws.resolve(ws.config().paths.eval_dataset);
  return fs::exists(p) ? load_samples(p) : std::vector<Sample>{};
}

ToyPolicy load_stage1_policy(const Workspace& ws) {
  return load_checkpoint(ws.checkpoint("stage1.json"));
}

Json split_accuracy(const ToyPolicy& policy, const std::vector<Sample>& eval,
                    const Workspace& ws) {
  Json j = Json::object();
  for (const char* tag : {"easy", "hard"}) {
    const auto subset = with_difficulty(eval, tag);
    if (subset.empty()) continue;
    j[tag] = evaluate_checkpoint(policy, subset, ws.phrasebook(), ws.inventory()).accuracy;
  }
  return j;
}

std::string split_accuracy_line(const Json& j) {
  std::string s;
  for (const auto& [tag, acc] : j.items()) {
    if (!s.empty()) s += "  ";
    s += strf("%s-split accuracy %.4f", tag.c_str(), acc.get<double>());
  }
  return s.empty() ? s : s + "\n";
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

std::string response_of(const Json& row) {
  if (row.is_string()) return row.get<std::string>();
  for (const char* key : {"response", "text", "target"}) {
    if (row.is_object() && row.contains(key) && row.at(key).is_string()) {
      return row.at(key).get<std::string>();
    }
  }
  throw ParseError("response row needs a 'response' string: " + row.dump());
}

std::string gold_of(const Json& row) {
  if (row.is_string()) return row.get<std::string>();
  for (const char* key : {"gold_label", "gold"}) {
    if (row.is_object() && row.contains(key) && row.at(key).is_string()) {
      return row.at(key).get<std::string>();
    }
  }
  throw ParseError("gold row needs a 'gold_label' string: " + row.dump());
}

}  // namespace

CommandResult cmd_gen_synthetic(const Workspace& ws) {
  const auto& cfg = ws.config();
  const auto& inv = ws.inventory();
  const SyntheticTask task = generate_synthetic_task(cfg.synthetic, inv, cfg.seed);
  const fs::path train = ws.resolve(cfg.paths.dataset);
  const fs::path eval = ws.resolve(cfg.paths.eval_dataset);
  const fs::path demos = ws.resolve("synthetic_demos.jsonl");
  save_samples(train, task.train);
  save_samples(eval, task.eval);
  save_sft_records(demos, task.demos);
  write_jsonl(ws.resolve("labels.jsonl"), inv.to_jsonl());

  auto count = [](const std::vector<Sample>& v, const char* tag) {
    return static_cast<std::size_t>(std::count_if(v.begin(), v.end(), [&](const Sample& s) {
      return s.difficulty && *s.difficulty == tag;
    }));
  };
  std::size_t none = 0;
  for (const auto& s : task.train) none += s.gold_label == "none";

  CommandResult r;
  r.result = {{"train", train.string()},
              {"eval", eval.string()},
              {"demos", demos.string()},
              {"num_train", task.train.size()},
              {"num_eval", task.eval.size()},
              {"train_none", none},
              {"train_easy", count(task.train, "easy")},
              {"train_hard", count(task.train, "hard")},
              {"eval_easy", count(task.eval, "easy")},
              {"eval_hard", count(task.eval, "hard")},
              {"length_threshold", cfg.synthetic.length_threshold(inv)}};
  r.summary = strf("wrote %zu train and %zu eval samples (%zu labels)\n", task.train.size(),
                   task.eval.size(), inv.size()) +
              strf("train: none %zu  easy %zu  hard %zu\n", none, count(task.train, "easy"),
                   count(task.train, "hard")) +
              strf("length threshold matching the phrasebook: %zu\n",
                   cfg.synthetic.length_threshold(inv));
  return r;
}

CommandResult cmd_build_sft(const Workspace& ws) {
  const auto& cfg = ws.config();
  const auto dataset = load_dataset(ws);
  const auto chosen = select_stage1(ws, dataset);
  auto client = ws.make_expert_client();
  AnnotateOptions opt;
  opt.max_rejection_retries = cfg.expert.max_rejection_retries;
  opt.concurrency = cfg.expert.concurrency;
  const fs::path out = ws.resolve(cfg.paths.sft_records);
  fs::path partial = out;
  partial += ".partial";
  AnnotateResult res;
  try {
    res = annotate(chosen, *client, ws.inventory(), opt);
  } catch (ExpertUnavailable& e) {
    save_sft_records(partial, e.partial);
    throw;
  }
  save_sft_records(out, res.records);
  if (fs::exists(partial)) fs::remove(partial);
  write_json(ws.log("sft_stats.json"), res.stats.to_json());

  CommandResult r;
  r.result = res.stats.to_json();
  r.result["records"] = out.string();
  r.summary = strf("selected %zu of %zu samples (fraction %.3f)\n", chosen.size(), dataset.size(),
                   cfg.stage1.fraction) +
              strf("requests %zu  accepted %zu (%zu after a retry)  dropped %zu  rate %.4f\n",
                   res.stats.requests, res.stats.accepted, res.stats.accepted_after_retry,
                   res.stats.dropped, res.stats.acceptance_rate()) +
              "records: " + out.string() + "\n";
  return r;
}

CommandResult cmd_train_stage1(const Workspace& ws) {
  const auto dataset = load_dataset(ws);
  auto client = ws.make_expert_client();
  const Stage1Result res = run_stage1(ws, dataset, client.get());
  const auto eval = load_eval_if_present(ws);

  CommandResult r;
  r.result = {{"checkpoint", ws.checkpoint("stage1.json").string()},
              {"sft_samples", res.sft_ids.size()},
              {"demos", res.demos},
              {"unmapped", res.unmapped},
              {"annotated", res.annotated},
              {"sft_nll", res.sft_history}};
  if (res.annotated) r.result["annotation"] = res.annotation.to_json();
  r.summary = strf("stage 1: %zu samples selected, %zu demos used", res.sft_ids.size(), res.demos);
  r.summary += res.annotated ? strf(", %zu annotated\n", res.annotation.samples) : "\n";
  if (!res.sft_history.empty()) {
    r.summary += strf("SFT mean NLL %.4f -> %.4f over %zu epochs\n", res.sft_history.front(),
                      res.sft_history.back(), res.sft_history.size());
  }
  if (!eval.empty()) {
    const EvalReport rep = evaluate_checkpoint(res.policy, eval, ws.phrasebook(), ws.inventory());
    r.result["eval"] = rep.to_json();
    r.result["split_accuracy"] = split_accuracy(res.policy, eval, ws);
    r.summary += strf("eval: Acc %.4f  P %.4f  R %.4f  F1 %.4f\n", rep.accuracy, rep.precision,
                      rep.recall, rep.f1) +
                 split_accuracy_line(r.result["split_accuracy"]);
  }
  r.summary += "checkpoint: " + ws.checkpoint("stage1.json").string() + "\n";
  return r;
}

CommandResult cmd_split_difficulty(const Workspace& ws) {
  const ToyPolicy init = load_stage1_policy(ws);
  const auto pool = rl_pool(load_dataset(ws), load_stage1_ids(ws));
  const DifficultySplit split =
      split_by_difficulty(pool, PolicySnapshot(init, "stage1"), ws.phrasebook(), ws.inventory());
  const fs::path out = ws.log("difficulty.jsonl");
  write_jsonl(out, split.to_jsonl());

  CommandResult r;
  r.result = {{"pool", pool.size()},
              {"easy", split.easy_ids.size()},
              {"hard", split.hard_ids.size()},
              {"provenance", split.provenance},
              {"path", out.string()}};
  r.summary = strf("pool %zu: easy %zu  hard %zu (judge %s)\n", pool.size(),
                   split.easy_ids.size(), split.hard_ids.size(), split.provenance.c_str()) +
              "split: " + out.string() + "\n";
  return r;
}

CommandResult cmd_train_stage2(const Workspace& ws) {
  const ToyPolicy init = load_stage1_policy(ws);
  const auto dataset = load_dataset(ws);
  const auto pool = rl_pool(dataset, load_stage1_ids(ws));
  const auto eval = load_eval_if_present(ws);

  Stage2Options opt;
  opt.checkpoint_dir = ws.resolve(ws.config().paths.checkpoints);
  opt.log_dir = ws.resolve(ws.config().paths.logs);
  if (!eval.empty()) opt.eval = &eval;
  const Stage2Result res = run_stage2(ws, init, pool, opt);

  CommandResult r;
  Json epochs = Json::array();
  std::ostringstream os;
  os << strf("mix mode %s, %zu easy / %zu hard in the pool\n",
             ws.config().stage2.mode().name().c_str(), res.split.easy_ids.size(),
             res.split.hard_ids.size());
  os << strf("%5s %6s %6s %8s %8s %6s %10s %8s\n", "epoch", "easy", "hard", "easy_tot",
             "hard_tot", "steps", "reward", "F1");
  for (const auto& e : res.epochs) {
    Json row = {{"epoch", e.epoch},
                {"batch_easy", e.plan.plan.easy_count},
                {"batch_hard", e.plan.plan.hard_count},
                {"easy_total", e.plan.easy_total},
                {"hard_total", e.plan.hard_total},
                {"steps", e.steps},
                {"mean_reward", e.mean_reward}};
    if (e.eval) row["eval"] = e.eval->to_json();
    epochs.push_back(row);
    os << strf("%5d %6zu %6zu %8zu %8zu %6zu %10.4f %8s\n", e.epoch, e.plan.plan.easy_count,
               e.plan.plan.hard_count, e.plan.easy_total, e.plan.hard_total, e.steps,
               e.mean_reward, e.eval ? strf("%.4f", e.eval->f1).c_str() : "-");
  }
  r.result = {{"epochs", epochs},
              {"steps", res.steps.size()},
              {"final_checkpoint", (*opt.checkpoint_dir / "stage2_final.json").string()},
              {"telemetry", (*opt.log_dir / "telemetry.jsonl").string()}};
  if (res.best) {
    r.result["best_epoch"] = res.best_epoch;
    r.result["best"] = res.best->to_json();
    r.result["split_accuracy"] = split_accuracy(res.policy, eval, ws);
    os << strf("best epoch %d: F1 %.4f\n", res.best_epoch, res.best->f1);
    os << split_accuracy_line(r.result["split_accuracy"]);
  }
  os << "telemetry: " << (*opt.log_dir / "telemetry.jsonl").string() << "\n";
  r.summary = os.str();
  return r;
}

CommandResult cmd_evaluate(const Workspace& ws, const std::string& checkpoint) {
  const fs::path path =
      checkpoint.empty() ? ws.checkpoint("stage2_final.json") : ws.resolve(checkpoint);
  const ToyPolicy policy = load_checkpoint(path);
  const auto eval = load_samples(ws.resolve(ws.config().paths.eval_dataset));
  const EvalReport rep = evaluate_checkpoint(policy, eval, ws.phrasebook(), ws.inventory());
  write_json(ws.log("eval_report.json"), rep.to_json());
  write_text(ws.log("confusion.csv"), rep.confusion_csv());

  CommandResult r;
  r.result = rep.to_json();
  r.result["checkpoint"] = path.string();
  r.result["split_accuracy"] = split_accuracy(policy, eval, ws);
  r.summary = "checkpoint: " + path.string() + "\n" + rep.to_table() + "\n" +
              split_accuracy_line(r.result["split_accuracy"]);
  return r;
}

CommandResult cmd_ablate(const Workspace& ws) {
  const ToyPolicy init = load_stage1_policy(ws);
  const auto pool = rl_pool(load_dataset(ws), load_stage1_ids(ws));
  const auto eval = load_samples(ws.resolve(ws.config().paths.eval_dataset));
  const auto hard_eval = with_difficulty(eval, "hard");
  const auto easy_eval = with_difficulty(eval, "easy");
  const DifficultySplit split =
      split_by_difficulty(pool, PolicySnapshot(init, "stage1"), ws.phrasebook(), ws.inventory());

  const RunConfig& base = ws.config();
  struct Variant {
    std::string name;
    std::string mode;
    double alpha;
  };
  const std::vector<Variant> variants = {
      {strf("progressive(%g)", base.stage2.alpha), "progressive", base.stage2.alpha},
      {"raw", "raw", base.stage2.alpha},
      {"fixed-equal", "fixed-equal", base.stage2.alpha},
      {"hard-only", "hard-only", base.stage2.alpha},
  };
  const std::vector<std::string> metrics = {"accuracy", "precision", "recall",
                                            "f1",       "easy_accuracy", "hard_accuracy"};

  std::vector<Json> runs;
  std::map<std::string, std::map<std::string, std::vector<double>>> values;
  for (int k = 0; k < base.ablation_seeds; ++k) {
    for (const auto& v : variants) {
      RunConfig cfg = base;
      cfg.seed = base.seed + static_cast<std::uint64_t>(k);
      cfg.stage2.mix_mode = v.mode;
      cfg.stage2.alpha = v.alpha;
      const Workspace run_ws(cfg, ws.root());
      Stage2Options opt;
      opt.split = split;
      opt.log_dir = ws.log("ablation") / v.mode / ("seed" + std::to_string(cfg.seed));
      const Stage2Result res = run_stage2(run_ws, init, pool, opt);
      const EvalReport rep = evaluate_checkpoint(res.policy, eval, ws.phrasebook(), ws.inventory());
      const double easy_acc =
          easy_eval.empty()
              ? 0.0
              : evaluate_checkpoint(res.policy, easy_eval, ws.phrasebook(), ws.inventory()).accuracy;
      const double hard_acc =
          hard_eval.empty()
              ? 0.0
              : evaluate_checkpoint(res.policy, hard_eval, ws.phrasebook(), ws.inventory()).accuracy;
      Json row = {{"variant", v.name},
                  {"seed", cfg.seed},
                  {"steps", res.steps.size()},
                  {"first_epoch_reward", res.epochs.empty() ? 0.0 : res.epochs.front().mean_reward},
                  {"final_epoch_reward", res.epochs.empty() ? 0.0 : res.epochs.back().mean_reward},
                  {"report", rep.to_json()},
                  {"easy_accuracy", easy_acc},
                  {"hard_accuracy", hard_acc}};
      runs.push_back(row);
      auto& m = values[v.name];
      m["accuracy"].push_back(rep.accuracy);
      m["precision"].push_back(rep.precision);
      m["recall"].push_back(rep.recall);
      m["f1"].push_back(rep.f1);
      m["easy_accuracy"].push_back(easy_acc);
      m["hard_accuracy"].push_back(hard_acc);
    }
  }
  write_jsonl(ws.log("ablation_runs.jsonl"), runs);

  std::vector<std::string> ranked;
  for (const auto& v : variants) ranked.push_back(v.name);
  std::stable_sort(ranked.begin(), ranked.end(), [&](const std::string& a, const std::string& b) {
    return mean_of(values[a]["f1"]) > mean_of(values[b]["f1"]);
  });

  const std::string& ref = variants.front().name;
  Json summary = Json::array();
  std::ostringstream os;
  os << strf("%d seeds x %zu variants, ranked by F1\n", base.ablation_seeds, variants.size());
  os << strf("%-18s", "variant");
  for (const auto& m : metrics) os << strf(" %17s", m.c_str());
  os << "\n";
  for (const auto& name : ranked) {
    Json row = {{"variant", name}};
    os << strf("%-18s", name.c_str());
    for (const auto& m : metrics) {
      const auto& xs = values[name][m];
      row[m] = {{"mean", mean_of(xs)}, {"std", std_of(xs)}};
      os << strf(" %8.4f+-%-7.4f", mean_of(xs), std_of(xs));
    }
    os << "\n";
    summary.push_back(row);
  }
  os << "\ndelta vs " << ref << "\n";
  Json deltas = Json::array();
  for (const auto& v : variants) {
    if (v.name == ref) continue;
    Json row = {{"variant", v.name}};
    os << strf("%-18s", v.name.c_str());
    for (const auto& m : metrics) {
      const double d = mean_of(values[v.name][m]) - mean_of(values[ref][m]);
      row[m] = d;
      os << strf(" %+17.4f", d);
    }
    os << "\n";
    deltas.push_back(row);
  }

  CommandResult r;
  r.result = {{"seeds", base.ablation_seeds},
              {"runs", runs.size()},
              {"summary", summary},
              {"delta", deltas},
              {"split", {{"easy", split.easy_ids.size()}, {"hard", split.hard_ids.size()}}}};
  write_json(ws.log("ablation_summary.json"), r.result);
  write_text(ws.log("ablation_summary.txt"), os.str());
  r.summary = os.str();
  return r;
}

CommandResult cmd_inspect_reward(const Workspace& ws, const fs::path& responses,
                                 const fs::path& golds) {
  const auto& inv = ws.inventory();
  const auto resp_rows = read_jsonl(responses);
  const auto gold_rows = read_jsonl(golds);
  if (resp_rows.size() != gold_rows.size()) {
    throw LengthMismatch(strf("%zu responses but %zu gold labels", resp_rows.size(),
                              gold_rows.size()));
  }
  std::array<std::size_t, 4> histogram{};
  Json rows = Json::array();
  std::ostringstream os;
  os << strf("%5s %-24s %6s %6s %6s %5s\n", "line", "parse", "format", "length", "answer",
             "total");
  double sum = 0.0;
  for (std::size_t i = 0; i < resp_rows.size(); ++i) {
    const std::string raw = response_of(resp_rows[i]);
    const RelationLabel& gold = inv.parse(gold_of(gold_rows[i]));
    const ParsedResponse parsed = parse_response(raw);
    const RewardBreakdown b = composite_reward(raw, gold, inv, ws.config().reward);
    const std::string status = parsed.structure_ok ? "ok" : parsed.failure;
    rows.push_back({{"line", i + 1},
                    {"structure_ok", parsed.structure_ok},
                    {"failure", parsed.failure},
                    {"length", text_length(raw)},
                    {"format_reward", b.format},
                    {"length_reward", b.length},
                    {"answer_reward", b.answer},
                    {"total", b.total}});
    ++histogram[static_cast<std::size_t>(std::lround(b.total))];
    sum += b.total;
    os << strf("%5zu %-24.24s %6.0f %6.0f %6.0f %5.0f\n", i + 1, status.c_str(), b.format, b.length,
               b.answer, b.total);
  }
  const double mean = rows.empty() ? 0.0 : sum / static_cast<double>(rows.size());
  os << strf("\n%zu responses, mean total %.4f\n", rows.size(), mean);
  for (std::size_t t = 0; t < histogram.size(); ++t) {
    os << strf("total %zu: %zu\n", t, histogram[t]);
  }

  CommandResult r;
  r.result = {{"rows", rows}, {"count", rows.size()}, {"mean_total", mean},
              {"histogram", histogram}};
  r.summary = os.str();
  return r;
}

}  // namespace relgrpo
