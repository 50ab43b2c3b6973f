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

#include "relgrpo/relgrpo.h"

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "core/commands.hpp"
#include "core/config.hpp"
#include "core/error.hpp"
#include "core/reward.hpp"
#include "core/scheduler.hpp"

struct relgrpo_session {
  relgrpo::RunConfig config;
  std::filesystem::path root;
  std::string config_text;
  std::string summary;
  std::string result;
};

namespace {

thread_local std::string g_last_error;

relgrpo_status fail(relgrpo_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

// Runs fn and maps any exception to a status code plus a thread-local message.
template <typename Fn>
relgrpo_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return RELGRPO_OK;
  } catch (const relgrpo::Error& e) {
    return fail(static_cast<relgrpo_status>(e.code()), e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(RELGRPO_E_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(RELGRPO_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(RELGRPO_E_INTERNAL, e.what());
  }
}

relgrpo_status run_command(relgrpo_session* s,
                           relgrpo::CommandResult (*cmd)(const relgrpo::Workspace&)) {
  if (s == nullptr) return fail(RELGRPO_E_INVALID_ARGUMENT, "null session");
  return guarded([&] {
    const relgrpo::Workspace ws(s->config, s->root);
    relgrpo::CommandResult r = cmd(ws);
    s->summary = std::move(r.summary);
    s->result = r.result.dump();
  });
}

}  // namespace

extern "C" {

const char* relgrpo_version(void) { return "0.1.0"; }

const char* relgrpo_status_name(relgrpo_status status) {
  if (status == RELGRPO_OK) return "ok";
  if (status < RELGRPO_E_INVALID_ARGUMENT || status > RELGRPO_E_INTERNAL) return "unknown";
  return relgrpo::error_code_name(static_cast<relgrpo::ErrorCode>(status));
}

const char* relgrpo_last_error(void) { return g_last_error.c_str(); }

relgrpo_status relgrpo_session_open(const char* config_path, const char* out_dir,
                                    relgrpo_session** out) {
  if (out == nullptr) return fail(RELGRPO_E_INVALID_ARGUMENT, "null output handle");
  *out = nullptr;
  return guarded([&] {
    auto s = std::make_unique<relgrpo_session>();
    if (config_path != nullptr) s->config = relgrpo::RunConfig::load(config_path);
    s->root = out_dir != nullptr ? std::filesystem::path(out_dir) : std::filesystem::path(".");
    *out = s.release();
  });
}

void relgrpo_session_close(relgrpo_session* session) { delete session; }

relgrpo_status relgrpo_session_set(relgrpo_session* session, const char* key, const char* value) {
  if (session == nullptr || key == nullptr || value == nullptr) {
    return fail(RELGRPO_E_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] { session->config.set(key, value); });
}

relgrpo_status relgrpo_session_set_seed(relgrpo_session* session, uint64_t seed) {
  if (session == nullptr) return fail(RELGRPO_E_INVALID_ARGUMENT, "null session");
  session->config.seed = seed;
  return RELGRPO_OK;
}

const char* relgrpo_session_config_json(relgrpo_session* session) {
  if (session == nullptr) return "";
  session->config_text = session->config.to_json().dump(2);
  return session->config_text.c_str();
}

const char* relgrpo_session_summary(const relgrpo_session* session) {
  return session == nullptr ? "" : session->summary.c_str();
}

const char* relgrpo_session_result_json(const relgrpo_session* session) {
  return session == nullptr ? "" : session->result.c_str();
}

relgrpo_status relgrpo_gen_synthetic(relgrpo_session* s) {
  return run_command(s, relgrpo::cmd_gen_synthetic);
}

relgrpo_status relgrpo_build_sft(relgrpo_session* s) {
  return run_command(s, relgrpo::cmd_build_sft);
}

relgrpo_status relgrpo_split_difficulty(relgrpo_session* s) {
  return run_command(s, relgrpo::cmd_split_difficulty);
}

relgrpo_status relgrpo_train_stage1(relgrpo_session* s) {
  return run_command(s, relgrpo::cmd_train_stage1);
}

relgrpo_status relgrpo_train_stage2(relgrpo_session* s) {
  return run_command(s, relgrpo::cmd_train_stage2);
}

relgrpo_status relgrpo_evaluate(relgrpo_session* s, const char* checkpoint) {
  if (s == nullptr) return fail(RELGRPO_E_INVALID_ARGUMENT, "null session");
  const std::string ckpt = checkpoint == nullptr ? "" : checkpoint;
  return guarded([&] {
    const relgrpo::Workspace ws(s->config, s->root);
    relgrpo::CommandResult r = relgrpo::cmd_evaluate(ws, ckpt);
    s->summary = std::move(r.summary);
    s->result = r.result.dump();
  });
}

relgrpo_status relgrpo_ablate(relgrpo_session* s) { return run_command(s, relgrpo::cmd_ablate); }

relgrpo_status relgrpo_inspect_reward(relgrpo_session* s, const char* responses_path,
                                      const char* gold_path) {
  if (s == nullptr || responses_path == nullptr || gold_path == nullptr) {
    return fail(RELGRPO_E_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    const relgrpo::Workspace ws(s->config, s->root);
    relgrpo::CommandResult r = relgrpo::cmd_inspect_reward(ws, responses_path, gold_path);
    s->summary = std::move(r.summary);
    s->result = r.result.dump();
  });
}

relgrpo_status relgrpo_score_response(const char* response, const char* gold_label,
                                      size_t length_threshold, double out[4]) {
  if (response == nullptr || gold_label == nullptr || out == nullptr) {
    return fail(RELGRPO_E_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    static const relgrpo::LabelInventory inv = relgrpo::LabelInventory::builtin();
    relgrpo::RewardConfig cfg;
    cfg.length_threshold = length_threshold;
    const auto b = relgrpo::composite_reward(response, inv.parse(gold_label), inv, cfg);
    out[0] = b.format;
    out[1] = b.length;
    out[2] = b.answer;
    out[3] = b.total;
  });
}

relgrpo_status relgrpo_mix_counts(int epoch, double alpha, size_t batch_size, size_t* easy,
                                  size_t* hard) {
  if (easy == nullptr || hard == nullptr) return fail(RELGRPO_E_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const auto plan = relgrpo::mix_counts(epoch, alpha, batch_size);
    *easy = plan.easy_count;
    *hard = plan.hard_count;
  });
}

}  // extern "C"
