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

#include <stdexcept>
#include <string>

namespace relgrpo {

// Failure categories. Each maps one-to-one onto a status code of the C API.
enum class ErrorCode {
  kInvalidArgument = 1,
  kConfig,
  kIo,
  kParse,
  kUnknownLabel,
  kGroupTooSmall,
  kPolicyMismatch,
  kInvalidToken,
  kPoolExhausted,
  kExpertUnavailable,
  kLengthMismatch,
  kMissingCheckpoint,
  kInternal,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

#define RELGRPO_DEFINE_ERROR(Name, Code)                               \
  class Name : public Error {                                          \
   public:                                                             \
    explicit Name(const std::string& what) : Error(ErrorCode::Code, what) {} \
  };

RELGRPO_DEFINE_ERROR(InvalidArgument, kInvalidArgument)
RELGRPO_DEFINE_ERROR(ConfigError, kConfig)
RELGRPO_DEFINE_ERROR(IoError, kIo)
RELGRPO_DEFINE_ERROR(ParseError, kParse)
RELGRPO_DEFINE_ERROR(UnknownLabel, kUnknownLabel)
RELGRPO_DEFINE_ERROR(GroupTooSmall, kGroupTooSmall)
RELGRPO_DEFINE_ERROR(PolicyMismatch, kPolicyMismatch)
RELGRPO_DEFINE_ERROR(InvalidToken, kInvalidToken)
RELGRPO_DEFINE_ERROR(PoolExhausted, kPoolExhausted)
RELGRPO_DEFINE_ERROR(LengthMismatch, kLengthMismatch)
RELGRPO_DEFINE_ERROR(MissingCheckpoint, kMissingCheckpoint)

#undef RELGRPO_DEFINE_ERROR

}  // namespace relgrpo
