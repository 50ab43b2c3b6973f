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

// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>

#include "common/fixtures.hpp"
#include "common/reward_vectors.hpp"
#include "core/commands.hpp"
#include "core/grpo.hpp"
#include "core/metrics.hpp"
#include "core/reward.hpp"
#include "core/scheduler.hpp"
#include "core/trainer.hpp"

namespace fs = std::filesystem;
using namespace relgrpo;
using namespace relgrpo::testing;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void fail(const char* fmt, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, fmt);
    std::vsnprintf(buf, sizeof(buf), fmt, ap);
    va_end(ap);
    if (pass) detail = buf;
    pass = false;
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof(buf), f, ap);
  va_end(ap);
  return buf;
}

Outcome advantage_oracle() {
  Outcome o;
  const auto t0 = Clock::now();
  Rng rng(101);
  const std::size_t sizes[] = {2, 4, 8, 16};
  double worst_mean = 0.0, worst_std = 0.0;
  int zero_groups = 0;
  for (int g = 0; g < 1000; ++g) {
    const std::size_t k = sizes[rng.index(4)];
    std::vector<double> rewards(k);
    const bool flat = g % 10 == 0;
    const double level = static_cast<double>(rng.index(4));
    for (auto& r : rewards) r = flat ? level : static_cast<double>(rng.index(4)) + 0.1 * rng.normal();
    const auto a = compute_advantages(rewards);
    double mean = 0.0, var_in = 0.0;
    for (double r : rewards) mean += r / k;
    for (double r : rewards) var_in += (r - mean) * (r - mean) / k;
    if (var_in == 0.0) {
      ++zero_groups;
      for (double x : a) {
        if (x != 0.0) o.fail("zero-variance group gave a nonzero advantage %g", x);
      }
      continue;
    }
    double am = 0.0, av = 0.0;
    for (double x : a) am += x / k;
    for (double x : a) av += (x - am) * (x - am) / k;
    worst_mean = std::max(worst_mean, std::abs(am));
    worst_std = std::max(worst_std, std::abs(std::sqrt(av) - 1.0));
  }
  const double t = seconds_since(t0);
  if (worst_mean > 1e-9) o.fail("mean %.3g", worst_mean);
  if (worst_std > 1e-9) o.fail("std off by %.3g", worst_std);
  if (t >= 1.0) o.fail("took %.2fs", t);
  if (o.pass) {
    o.detail = fmt("1000 groups (%d zero-variance), max |mean| %.2g, max |std-1| %.2g, %.3fs",
                   zero_groups, worst_mean, worst_std, t);
  }
  return o;
}

Outcome gradient_fidelity() {
  Outcome o;
  const auto t0 = Clock::now();
  Rng rng(202);
  double worst = 0.0;
  for (double beta : {0.001, 1.0}) {
    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t f = 2 + rng.index(4);
      std::vector<std::size_t> vocab(1 + rng.index(3));
      for (auto& v : vocab) v = 2 + rng.index(4);
      const auto p = random_policy(f, vocab, rng);
      GrpoHyperparams hp;
      hp.beta = beta;
      const Group g = random_group(p, 2 + rng.index(7), hp.epsilon, rng);
      worst = std::max(worst, max_relative_error(grpo_objective_gradient(g, hp, p),
                                                 numeric_gradient(g, hp, p)));
    }
  }
  const double t = seconds_since(t0);
  if (worst >= 1e-5) o.fail("max relative error %.3g", worst);
  if (t >= 30.0) o.fail("took %.1fs", t);
  if (o.pass) o.detail = fmt("200 instances (beta 0.001 and 1), max relative error %.2g, %.2fs", worst, t);
  return o;
}

Outcome clipping_semantics() {
  Outcome o;
  Rng rng(303);
  const auto p = random_policy(3, {3, 4}, rng);
  const Query q = random_query(3, rng);
  GrpoHyperparams hp;
  hp.epsilon = 0.2;
  hp.beta = 0.0;
  int cases = 0, clipped = 0;
  for (int i = 0; i <= 100; ++i) {
    const double grid = 0.5 + 0.01 * i;
    for (double a : {-2.0, -1.0, 1.0, 2.0}) {
      Group g;
      g.query = q;
      for (int k = 0; k < 2; ++k) {
        Rollout r;
        r.query_id = "q";
        r.tokens = {k, 1};
        r.logp_current = p.logprob(q, r.tokens);
        r.logp_ref = r.logp_current;
        r.logp_old = r.logp_current - (k == 0 ? std::log(grid) : 0.0);
        g.rollouts.push_back(r);
      }
      g.advantages = {a, 0.0};
      const Rollout& r = g.rollouts[0];
      const double xi = std::exp(r.logp_current - r.logp_old);
      const double clip = std::clamp(xi, 1.0 - hp.epsilon, 1.0 + hp.epsilon);
      const double hand = std::min(xi * a, clip * a);
      const bool hand_clipped = clip * a < xi * a;
      const auto terms = rollout_terms(r, a, hp);
      if (terms.surrogate != hand) o.fail("xi %.2f A %g: surrogate %.17g vs %.17g", grid, a, terms.surrogate, hand);
      if (terms.clipped != hand_clipped) o.fail("xi %.2f A %g: clip flag", grid, a);
      if (grpo_objective(g, hp) != hand / 2.0) o.fail("xi %.2f A %g: objective", grid, a);
      const auto grad = grpo_objective_gradient(g, hp, p);
      const bool zero = std::all_of(grad.begin(), grad.end(), [](double x) { return x == 0.0; });
      if (zero != hand_clipped) o.fail("xi %.2f A %g: gradient zero=%d clipped=%d", grid, a, zero, hand_clipped);
      ++cases;
      clipped += hand_clipped;
    }
  }
  if (o.pass) o.detail = fmt("%d grid cases, %d on the clipped branch with zero gradient", cases, clipped);
  return o;
}

Outcome kl_properties() {
  Outcome o;
  Rng rng(404);
  double worst = 0.0, lowest = INFINITY;
  for (int i = 0; i < 1000000; ++i) {
    const double cur = 20.0 * rng.normal();
    const double d = -10.0 + 20.0 * rng.uniform();
    const double kl = kl_term(cur, cur + d);
    lowest = std::min(lowest, kl);
    const double x = std::exp(d);
    const double ref = x - std::log(x) - 1.0;
    worst = std::max(worst, std::abs(kl - ref) / std::max(1.0, std::abs(ref)));
  }
  if (lowest < 0.0) o.fail("negative value %.3g", lowest);
  for (double v : {-3.0, 0.0, 7.5}) {
    if (kl_term(v, v) != 0.0) o.fail("nonzero at ratio 1");
  }
  if (worst > 1e-12) o.fail("max deviation %.3g", worst);
  if (o.pass) o.detail = fmt("1e6 inputs, min %.3g, max relative deviation %.2g", lowest, worst);
  return o;
}

Outcome scheduler_table() {
  Outcome o;
  const std::pair<std::size_t, std::size_t> want[] = {{8, 8}, {6, 10}, {4, 12}, {2, 14}};
  std::string seen;
  for (int t = 1; t <= 4; ++t) {
    const auto m = mix_counts(t, 0.5, 16);
    seen += fmt("(%zu,%zu)", m.easy_count, m.hard_count);
    if (m.easy_count != want[t - 1].first || m.hard_count != want[t - 1].second) o.fail("t=%d", t);
  }
  for (int t = 1; t <= 20; ++t) {
    const auto m = mix_counts(t, 1.0, 16);
    if (m.easy_count != 8 || m.hard_count != 8) o.fail("alpha 1, t=%d", t);
    for (double alpha : {0.1, 0.25, 0.5, 0.75, 0.9}) {
      for (std::size_t b : {2u, 5u, 16u, 31u, 64u}) {
        const auto x = mix_counts(t, alpha, b);
        if (x.easy_count + x.hard_count != b) o.fail("sum at t=%d alpha %g B %zu", t, alpha, b);
      }
    }
  }
  if (o.pass) o.detail = "alpha 0.5: " + seen + ", alpha 1 always (8,8), sums equal B";
  return o;
}

Outcome reward_parser() {
  Outcome o;
  const auto inv = LabelInventory::builtin();
  const auto vectors = golden_vectors();
  if (vectors.size() < 30) o.fail("only %zu golden vectors", vectors.size());
  for (const auto& v : vectors) {
    RewardConfig cfg;
    cfg.length_threshold = v.threshold;
    cfg.lenient_label = v.lenient;
    const auto r = composite_reward(v.raw, inv.parse(v.gold), inv, cfg);
    if (r.format != v.format || r.length != v.length || r.answer != v.answer) {
      o.fail("%s: got %g/%g/%g", v.name.c_str(), r.format, r.length, r.answer);
    }
  }
  Rng rng(606);
  RewardConfig cfg;
  cfg.length_threshold = 40;
  int totals[4] = {};
  for (int i = 0; i < 100000; ++i) {
    const auto raw = fuzz_string(rng);
    try {
      const auto r = composite_reward(raw, inv.at(rng.index(inv.size())), inv, cfg);
      const double t = r.total;
      if (t != 0.0 && t != 1.0 && t != 2.0 && t != 3.0) {
        o.fail("fuzz total %g", t);
      } else {
        ++totals[static_cast<int>(t)];
      }
    } catch (const std::exception& e) {
      o.fail("fuzz input threw: %s", e.what());
    }
  }
  if (o.pass) {
    o.detail = fmt("%zu golden vectors; 1e5 fuzz strings, totals 0/1/2/3 = %d/%d/%d/%d",
                   vectors.size(), totals[0], totals[1], totals[2], totals[3]);
  }
  return o;
}

Outcome metrics_oracle() {
  Outcome o;
  const auto inv = LabelInventory::builtin();
  const LabelIndex a = 0, b = 1, n = inv.none_index();
  const std::vector<LabelIndex> golds = {a, n, b, n};
  const std::vector<Prediction> preds = {a, b, n, n};
  const auto r = evaluate(preds, golds, inv);
  if (r.accuracy != 0.5 || r.precision != 0.5 || r.recall != 0.5 || r.f1 != 0.5) {
    o.fail("hand case %g/%g/%g/%g", r.accuracy, r.precision, r.recall, r.f1);
  }
  Rng rng(707);
  for (int c = 0; c < 200; ++c) {
    const std::size_t len = 1 + rng.index(40);
    const std::size_t k = 2 + rng.index(4);
    std::vector<LabelIndex> g;
    std::vector<Prediction> p;
    auto pick = [&]() -> LabelIndex {
      const auto j = rng.index(k);
      return j == 0 ? n : static_cast<LabelIndex>(j - 1);
    };
    for (std::size_t i = 0; i < len; ++i) {
      g.push_back(pick());
      p.push_back(rng.uniform() < 0.1 ? Prediction{} : Prediction{pick()});
    }
    std::size_t correct = 0, pred_nn = 0, gold_nn = 0, hit = 0;
    for (std::size_t i = 0; i < len; ++i) {
      const bool ok = p[i] && *p[i] == g[i];
      correct += ok;
      pred_nn += p[i] && *p[i] != n;
      gold_nn += g[i] != n;
      hit += ok && g[i] != n;
    }
    const double acc = static_cast<double>(correct) / len;
    const double pr = pred_nn ? static_cast<double>(hit) / pred_nn : 0.0;
    const double rc = gold_nn ? static_cast<double>(hit) / gold_nn : 0.0;
    const double f1 = pr + rc > 0 ? 2 * pr * rc / (pr + rc) : 0.0;
    const auto e = evaluate(p, g, inv);
    if (e.accuracy != acc || e.precision != pr || e.recall != rc || e.f1 != f1) {
      o.fail("random case %d differs from the counting oracle", c);
    }
  }
  if (o.pass) o.detail = "hand case all 0.5; 200 random sets equal the counting oracle";
  return o;
}

Outcome policy_normalization() {
  Outcome o;
  Rng rng(808);
  double worst = 0.0;
  for (int draw = 0; draw < 20; ++draw) {
    const auto p = random_policy(5, {4, 4, 4}, rng, 2.0);
    const auto q = random_query(5, rng);
    double total = 0.0;
    for (int x = 0; x < 4; ++x) {
      for (int y = 0; y < 4; ++y) {
        for (int z = 0; z < 4; ++z) {
          const TokenSeq s = {x, y, z};
          total += std::exp(sequence_logprob(p, q, s));
        }
      }
    }
    worst = std::max(worst, std::abs(total - 1.0));
  }
  if (worst > 1e-9) o.fail("max |sum - 1| = %.3g", worst);
  if (o.pass) o.detail = fmt("20 draws over 64 sequences, max |sum - 1| %.2g", worst);
  return o;
}

constexpr const char* kModes[] = {"progressive", "raw", "fixed-equal", "hard-only"};

Outcome synthetic_trend(const fs::path& scratch) {
  Outcome o;
  const auto t0 = Clock::now();
  const int seeds = 10;
  RunConfig base = RunConfig::load(fs::path(RELGRPO_CONFIG_DIR) / "synthetic.json");
  double easy_acc = 0.0, first = 0.0, last = 0.0, hard[4] = {}, f1[4] = {};
  for (int s = 0; s < seeds; ++s) {
    RunConfig cfg = base;
    cfg.seed = static_cast<std::uint64_t>(s);
    const fs::path root = scratch / ("seed" + std::to_string(s));
    fs::remove_all(root);
    Workspace ws(cfg, root);
    const auto task = generate_synthetic_task(cfg.synthetic, ws.inventory(), cfg.seed);
    auto client = ws.make_expert_client();
    const auto stage1 = run_stage1(ws, task.train, client.get());
    const auto easy = with_difficulty(task.eval, "easy");
    const auto hard_eval = with_difficulty(task.eval, "hard");
    easy_acc += evaluate_checkpoint(stage1.policy, easy, ws.phrasebook(), ws.inventory()).accuracy;
    const auto pool = rl_pool(task.train, stage1.sft_ids);
    std::optional<DifficultySplit> split;
    for (int m = 0; m < 4; ++m) {
      RunConfig variant = cfg;
      variant.stage2.mix_mode = kModes[m];
      Workspace wv(variant, root);
      Stage2Options opt;
      opt.split = split;
      const auto r = run_stage2(wv, stage1.policy, pool, opt);
      split = r.split;
      hard[m] += evaluate_checkpoint(r.policy, hard_eval, ws.phrasebook(), ws.inventory()).accuracy;
      f1[m] += evaluate_checkpoint(r.policy, task.eval, ws.phrasebook(), ws.inventory()).f1;
      if (m == 0) {
        first += r.epochs.front().mean_reward;
        last += r.epochs.back().mean_reward;
      }
    }
  }
  easy_acc /= seeds;
  first /= seeds;
  last /= seeds;
  for (int m = 0; m < 4; ++m) {
    hard[m] /= seeds;
    f1[m] /= seeds;
  }
  const double t = seconds_since(t0);
  if (easy_acc < 0.9) o.fail("(a) stage-1 easy accuracy %.4f", easy_acc);
  if (hard[0] < hard[1]) o.fail("(b) progressive hard %.4f < raw %.4f", hard[0], hard[1]);
  if (hard[0] < hard[3]) o.fail("(b) progressive hard %.4f < hard-only %.4f", hard[0], hard[3]);
  if (!(last > first)) o.fail("(c) reward %.4f -> %.4f", first, last);
  if (t >= 1200.0) o.fail("took %.0fs", t);
  const std::string stats =
      fmt("%d seeds: (a) easy acc %.3f; (b) hard acc progressive %.3f raw %.3f fixed-equal %.3f "
          "hard-only %.3f; (c) reward %.3f -> %.3f; F1 %.3f/%.3f/%.3f/%.3f; %.1fs",
          seeds, easy_acc, hard[0], hard[1], hard[2], hard[3], first, last, f1[0], f1[1], f1[2],
          f1[3], t);
  o.detail = o.pass ? stats : o.detail + " | " + stats;
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void run_pipeline(const RunConfig& cfg, const fs::path& root) {
  fs::remove_all(root);
  const Workspace ws(cfg, root);
  cmd_gen_synthetic(ws);
  cmd_build_sft(ws);
  cmd_train_stage1(ws);
  cmd_split_difficulty(ws);
  cmd_train_stage2(ws);
  cmd_evaluate(ws, "");
}

Outcome determinism(const fs::path& scratch) {
  Outcome o;
  RunConfig cfg = RunConfig::load(fs::path(RELGRPO_CONFIG_DIR) / "synthetic.json");
  cfg.seed = 7;
  cfg.stage2.workers = 4;
  const fs::path a = scratch / "det_a", b = scratch / "det_b";
  run_pipeline(cfg, a);
  run_pipeline(cfg, b);
  std::size_t files = 0, checkpoints = 0;
  for (const auto& entry : fs::recursive_directory_iterator(a)) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), a);
    ++files;
    if (rel.begin()->string() == "checkpoints") ++checkpoints;
    if (!fs::exists(b / rel)) {
      o.fail("%s missing in the second run", rel.c_str());
    } else if (slurp(entry.path()) != slurp(b / rel)) {
      o.fail("%s differs", rel.c_str());
    }
  }
  if (!fs::exists(a / "logs" / "telemetry.jsonl")) o.fail("no telemetry written");
  if (checkpoints == 0) o.fail("no checkpoints written");
  if (o.pass) {
    o.detail = fmt("%zu files identical, including telemetry.jsonl and %zu checkpoints", files,
                   checkpoints);
  }
  return o;
}

}  // namespace

int main() {
  const fs::path scratch = fs::temp_directory_path() / "relgrpo_acceptance";
  fs::create_directories(scratch);
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"advantage oracle", advantage_oracle},
      {"gradient fidelity", gradient_fidelity},
      {"clipping semantics", clipping_semantics},
      {"KL estimator properties", kl_properties},
      {"scheduler table", scheduler_table},
      {"reward parser suite", reward_parser},
      {"metrics oracle", metrics_oracle},
      {"sequence-policy normalization", policy_normalization},
      {"end-to-end synthetic trend", [&] { return synthetic_trend(scratch); }},
      {"determinism", [&] { return determinism(scratch); }},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.fail("exception: %s", e.what());
    }
    failed += !o.pass;
    std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
