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

#include <chrono>
#include <thread>

#include <httplib.h>

#include "core/datagen.hpp"

namespace relgrpo {

namespace {

std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

MockExpertClient::MockExpertClient(const LabelInventory& inv, Phrasebook book, double wrong_rate,
                                   std::uint64_t seed)
    : inv_(inv), book_(std::move(book)), wrong_rate_(wrong_rate), seed_(seed) {
  if (!(wrong_rate >= 0.0 && wrong_rate <= 1.0)) {
    throw InvalidArgument("mock wrong_rate must be in [0, 1]");
  }
}

std::string MockExpertClient::complete(const ExpertRequest& request) {
  static constexpr std::string_view kMarker = "the correct relation label is ";
  const auto at = request.user.rfind(kMarker);
  if (at == std::string::npos) {
    // Nothing to reason toward; answer with prose only.
    return "I cannot determine the relation.";
  }
  auto start = at + kMarker.size();
  auto end = request.user.find_first_of(" \n", start);
  std::string label = request.user.substr(start, end == std::string::npos ? end : end - start);
  if (!label.empty() && label.back() == '.') label.pop_back();
  const auto gold = inv_.find(label);
  if (!gold) return "<answer>" + label + "</answer>";

  std::uint64_t h = fnv1a(request.system, seed_ ^ 0xcbf29ce484222325ULL);
  h = fnv1a(request.user, h);
  h = fnv1a(std::to_string(request.attempt), h);
  Rng rng(h);
  LabelIndex answer = *gold;
  if (rng.uniform() < wrong_rate_ && inv_.size() > 1) {
    answer = (answer + 1 + rng.index(inv_.size() - 1)) % inv_.size();
  }
  TokenSeq tokens(kSequenceLength, 0);
  tokens[kAnswerPosition] = static_cast<int>(answer);
  return render_text(tokens, book_, inv_);
}

HttpExpertClient::HttpExpertClient(std::string url, double timeout_seconds, int transport_retries)
    : timeout_seconds_(timeout_seconds), transport_retries_(transport_retries) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw InvalidArgument("expert url needs a scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  scheme_host_port_ = url.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : url.substr(path_start);
  if (transport_retries_ < 0) throw InvalidArgument("transport retries must be >= 0");
}

std::string HttpExpertClient::complete(const ExpertRequest& request) {
  httplib::Client client(scheme_host_port_);
  const auto timeout = std::chrono::duration<double>(timeout_seconds_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  const std::string body = Json{{"system", request.system}, {"user", request.user}}.dump();
  std::string last_error;
  for (int attempt = 0; attempt <= transport_retries_; ++attempt) {
    auto res = client.Post(path_, body, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    try {
      const auto j = Json::parse(res->body);
      return j.at("text").get<std::string>();
    } catch (const Json::exception& e) {
      last_error = std::string("bad response body: ") + e.what();
    }
  }
  throw ExpertUnavailable("expert endpoint " + scheme_host_port_ + path_ + " failed after " +
                          std::to_string(transport_retries_ + 1) + " attempts: " + last_error);
}

}  // namespace relgrpo
