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
#include <vector>

#include <json.hpp>

namespace relgrpo {

using Json = nlohmann::json;

// Reads one JSON object per non-blank line. Throws IoError / ParseError with
// the offending line number.
std::vector<Json> read_jsonl(const std::filesystem::path& path);

// Truncates and writes.
void write_jsonl(const std::filesystem::path& path, const std::vector<Json>& rows);

void append_jsonl(const std::filesystem::path& path, const Json& row);

Json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& value);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace relgrpo
