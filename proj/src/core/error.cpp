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

#include "core/error.hpp"

namespace relgrpo {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kUnknownLabel: return "unknown_label";
    case ErrorCode::kGroupTooSmall: return "group_too_small";
    case ErrorCode::kPolicyMismatch: return "policy_mismatch";
    case ErrorCode::kInvalidToken: return "invalid_token";
    case ErrorCode::kPoolExhausted: return "pool_exhausted";
    case ErrorCode::kExpertUnavailable: return "expert_unavailable";
    case ErrorCode::kLengthMismatch: return "length_mismatch";
    case ErrorCode::kMissingCheckpoint: return "missing_checkpoint";
    case ErrorCode::kInternal: return "internal";
  }
  return "unknown";
}

}  // namespace relgrpo
