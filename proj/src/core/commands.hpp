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

#include <filesystem>
#include <string>

#include "core/jsonl.hpp"
#include "core/trainer.hpp"

namespace relgrpo {

// What a pipeline command reports: a human-readable summary and a JSON record.
struct CommandResult {
  std::string summary;
  Json result;
};

CommandResult cmd_gen_synthetic(const Workspace& ws);
CommandResult cmd_build_sft(const Workspace& ws);
CommandResult cmd_train_stage1(const Workspace& ws);
CommandResult cmd_split_difficulty(const Workspace& ws);
CommandResult cmd_train_stage2(const Workspace& ws);

// Empty checkpoint path: the final stage-2 checkpoint of the run directory.
CommandResult cmd_evaluate(const Workspace& ws, const std::string& checkpoint);

CommandResult cmd_ablate(const Workspace& ws);

CommandResult cmd_inspect_reward(const Workspace& ws, const std::filesystem::path& responses,
                                 const std::filesystem::path& golds);

}  // namespace relgrpo
