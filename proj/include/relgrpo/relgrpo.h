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

#ifndef RELGRPO_RELGRPO_H_
#define RELGRPO_RELGRPO_H_

#include <stddef.h>
#include <stdint.h>

#if defined(RELGRPO_BUILDING_LIBRARY)
#define RELGRPO_API __attribute__((visibility("default")))
#else
#define RELGRPO_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum relgrpo_status {
  RELGRPO_OK = 0,
  RELGRPO_E_INVALID_ARGUMENT = 1,
  RELGRPO_E_CONFIG = 2,
  RELGRPO_E_IO = 3,
  RELGRPO_E_PARSE = 4,
  RELGRPO_E_UNKNOWN_LABEL = 5,
  RELGRPO_E_GROUP_TOO_SMALL = 6,
  RELGRPO_E_POLICY_MISMATCH = 7,
  RELGRPO_E_INVALID_TOKEN = 8,
  RELGRPO_E_POOL_EXHAUSTED = 9,
  RELGRPO_E_EXPERT_UNAVAILABLE = 10,
  RELGRPO_E_LENGTH_MISMATCH = 11,
  RELGRPO_E_MISSING_CHECKPOINT = 12,
  RELGRPO_E_INTERNAL = 13
} relgrpo_status;

/* A run: configuration plus an output directory. */
typedef struct relgrpo_session relgrpo_session;

RELGRPO_API const char* relgrpo_version(void);

/* Stable identifier such as "unknown_label"; "ok" for RELGRPO_OK. */
RELGRPO_API const char* relgrpo_status_name(relgrpo_status status);

/* Message of the last failing call on this thread; "" when none. */
RELGRPO_API const char* relgrpo_last_error(void);

/* config_path may be NULL for defaults. Relative paths in the config resolve
 * against out_dir (NULL means the current directory). */
RELGRPO_API relgrpo_status relgrpo_session_open(const char* config_path, const char* out_dir,
                                                relgrpo_session** out);
RELGRPO_API void relgrpo_session_close(relgrpo_session* session);

/* Overrides one config key, e.g. ("stage2.alpha", "0.25"). */
RELGRPO_API relgrpo_status relgrpo_session_set(relgrpo_session* session, const char* key,
                                               const char* value);
RELGRPO_API relgrpo_status relgrpo_session_set_seed(relgrpo_session* session, uint64_t seed);

/* Effective configuration as JSON. Valid until the next call on the session. */
RELGRPO_API const char* relgrpo_session_config_json(relgrpo_session* session);

/* Human-readable summary and JSON record of the last successful command.
 * Valid until the next command on the session. */
RELGRPO_API const char* relgrpo_session_summary(const relgrpo_session* session);
RELGRPO_API const char* relgrpo_session_result_json(const relgrpo_session* session);

RELGRPO_API relgrpo_status relgrpo_gen_synthetic(relgrpo_session* session);
RELGRPO_API relgrpo_status relgrpo_build_sft(relgrpo_session* session);
RELGRPO_API relgrpo_status relgrpo_split_difficulty(relgrpo_session* session);
RELGRPO_API relgrpo_status relgrpo_train_stage1(relgrpo_session* session);
RELGRPO_API relgrpo_status relgrpo_train_stage2(relgrpo_session* session);
/* checkpoint may be NULL for the run's final stage-2 checkpoint. */
RELGRPO_API relgrpo_status relgrpo_evaluate(relgrpo_session* session, const char* checkpoint);
RELGRPO_API relgrpo_status relgrpo_ablate(relgrpo_session* session);
RELGRPO_API relgrpo_status relgrpo_inspect_reward(relgrpo_session* session,
                                                  const char* responses_path,
                                                  const char* gold_path);

/* Reward components of one response against the built-in label inventory.
 * out receives format, length, answer and total. */
RELGRPO_API relgrpo_status relgrpo_score_response(const char* response, const char* gold_label,
                                                  size_t length_threshold, double out[4]);

RELGRPO_API relgrpo_status relgrpo_mix_counts(int epoch, double alpha, size_t batch_size,
                                              size_t* easy, size_t* hard);

#ifdef __cplusplus
}
#endif

#endif  // RELGRPO_RELGRPO_H_
