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

// Command-line front end. Talks to the engine only through the C API.

#include <cstdio>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "relgrpo/relgrpo.h"

namespace {

struct Options {
  std::string config;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  std::string mix_mode;
  std::optional<double> alpha;
  std::vector<std::string> overrides;
  bool json = false;
  std::string checkpoint;
  std::string responses;
  std::string golds;
};

int report(relgrpo_status status, const std::string& command) {
  nlohmann::json line = {{"error", relgrpo_status_name(status)},
                         {"code", static_cast<int>(status)},
                         {"command", command},
                         {"message", relgrpo_last_error()}};
  std::cerr << line.dump() << std::endl;
  return static_cast<int>(status);
}

relgrpo_status configure(relgrpo_session* s, const Options& o) {
  for (const auto& kv : o.overrides) {
    const auto eq = kv.find('=');
    const std::string key = kv.substr(0, eq);
    const std::string value = kv.substr(eq + 1);
    if (auto st = relgrpo_session_set(s, key.c_str(), value.c_str()); st != RELGRPO_OK) return st;
  }
  if (o.seed) {
    if (auto st = relgrpo_session_set_seed(s, *o.seed); st != RELGRPO_OK) return st;
  }
  if (!o.mix_mode.empty()) {
    if (auto st = relgrpo_session_set(s, "stage2.mix_mode", o.mix_mode.c_str()); st != RELGRPO_OK) {
      return st;
    }
  }
  if (o.alpha) {
    const std::string a = nlohmann::json(*o.alpha).dump();
    if (auto st = relgrpo_session_set(s, "stage2.alpha", a.c_str()); st != RELGRPO_OK) return st;
  }
  return RELGRPO_OK;
}

int run(const std::string& command, const Options& o) {
  relgrpo_session* s = nullptr;
  relgrpo_status st =
      relgrpo_session_open(o.config.empty() ? nullptr : o.config.c_str(), o.out.c_str(), &s);
  if (st != RELGRPO_OK) return report(st, command);
  st = configure(s, o);
  if (st == RELGRPO_OK) {
    if (command == "gen-synthetic") {
      st = relgrpo_gen_synthetic(s);
    } else if (command == "build-sft") {
      st = relgrpo_build_sft(s);
    } else if (command == "split-difficulty") {
      st = relgrpo_split_difficulty(s);
    } else if (command == "train-stage1") {
      st = relgrpo_train_stage1(s);
    } else if (command == "train-stage2") {
      st = relgrpo_train_stage2(s);
    } else if (command == "evaluate") {
      st = relgrpo_evaluate(s, o.checkpoint.empty() ? nullptr : o.checkpoint.c_str());
    } else if (command == "ablate") {
      st = relgrpo_ablate(s);
    } else if (command == "inspect-reward") {
      st = relgrpo_inspect_reward(s, o.responses.c_str(), o.golds.c_str());
    } else if (command == "show-config") {
      std::cout << relgrpo_session_config_json(s) << std::endl;
    }
  }
  int code = 0;
  if (st != RELGRPO_OK) {
    code = report(st, command);
  } else if (command != "show-config") {
    std::cout << (o.json ? std::string(relgrpo_session_result_json(s)) + "\n"
                         : std::string(relgrpo_session_summary(s)));
  }
  relgrpo_session_close(s);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"relgrpo: two-stage SFT + GRPO training on a toy relation task"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "Run directory; relative config paths resolve here");
    sub->add_option("--seed", o.seed, "Seed for every random stream");
    sub->add_option("--mix-mode", o.mix_mode, "Stage-2 sample mixing")
        ->check(CLI::IsMember({"progressive", "raw", "fixed-equal", "hard-only"}));
    sub->add_option("--alpha", o.alpha, "Progressive decay factor in (0, 1]");
    sub->add_option("--set", o.overrides, "Config override key=value (repeatable)")
        ->check([](const std::string& kv) {
          return kv.find('=') == std::string::npos ? std::string("expected key=value") : "";
        });
    sub->add_flag("--json", o.json, "Print the JSON result instead of the summary");
  };

  const std::map<std::string, std::string> commands = {
      {"gen-synthetic", "Generate the synthetic train/eval sets and demo SFT records"},
      {"build-sft", "Annotate the stage-1 sample with the expert and filter the output"},
      {"split-difficulty", "Judge the RL pool with the stage-1 policy"},
      {"train-stage1", "Supervised cold start; writes the stage-1 checkpoint"},
      {"train-stage2", "GRPO with the configured sample mixing"},
      {"evaluate", "Greedy evaluation of a checkpoint on the eval set"},
      {"ablate", "Stage 2 under every mixing variant over several seeds"},
      {"inspect-reward", "Reward breakdown for a file of responses"},
      {"show-config", "Print the effective configuration"},
  };
  std::string chosen;
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    add_common(sub);
    if (name == "evaluate") {
      sub->add_option("--checkpoint", o.checkpoint, "Checkpoint to evaluate");
    }
    if (name == "inspect-reward") {
      sub->add_option("responses", o.responses, "JSON Lines of responses")->required();
      sub->add_option("golds", o.golds, "JSON Lines of gold labels")->required();
    }
    sub->callback([&chosen, name = name] { chosen = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    nlohmann::json line = {{"error", "usage"}, {"code", 64}, {"message", e.what()}};
    std::cerr << line.dump() << std::endl;
    return 64;
  }
  return run(chosen, o);
}
