/*
 * Copyright 2026 The dvs Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "dvs/chat_client.hpp"

#include <cstdlib>
#include <ctime>
#include <thread>

#include "dvs/error.hpp"
#include "dvs/io.hpp"
#include "dvs/json_util.hpp"
#include "http_util.hpp"

namespace dvs {

using nlohmann::json;

namespace {

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

json chat_request_json(const ChatRequest& req) {
  json body;
  body["model"] = req.model;
  json messages = json::array();
  for (const auto& m : req.messages) {
    messages.push_back({{"role", m.role}, {"content", m.content}});
  }
  body["messages"] = std::move(messages);
  body["temperature"] = req.temperature;
  if (req.seed) body["seed"] = *req.seed;
  return body;
}

std::string canonical_request(const json& request) {
  // nlohmann::json objects are std::map backed, so dump() emits sorted keys.
  return request.dump(-1, ' ', false, json::error_handler_t::strict);
}

std::string request_hash(const json& request) { return sha256_hex(canonical_request(request)); }

std::string request_hash(const ChatRequest& req) { return request_hash(chat_request_json(req)); }

nlohmann::ordered_json transcript_to_json(const LlmTranscript& t) {
  nlohmann::ordered_json j;
  j["request_hash"] = t.request_hash;
  j["request"] = t.request;
  j["response"] = t.response;
  j["model_id"] = t.model_id;
  j["timestamp"] = t.timestamp;
  return j;
}

LlmTranscript transcript_from_json(const json& j) {
  namespace ju = json_util;
  LlmTranscript t;
  t.request_hash = ju::require_string(j, "request_hash", "");
  t.request = ju::require_object(j, "request", "");
  t.response = ju::require_string(j, "response", "");
  t.model_id = ju::require_string(j, "model_id", "");
  t.timestamp = ju::require_string(j, "timestamp", "");
  const std::string recomputed = request_hash(t.request);
  if (recomputed != t.request_hash) {
    throw ParseError("request_hash: stored " + t.request_hash + " does not match recomputed " + recomputed);
  }
  return t;
}

TranscriptStore::TranscriptStore(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::filesystem::path TranscriptStore::path_for(const std::string& hash) const {
  return dir_ / (hash + ".json");
}

std::optional<LlmTranscript> TranscriptStore::load(const std::string& hash) const {
  const auto path = path_for(hash);
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) return std::nullopt;
  const auto doc = json_util::parse(read_file(path), path.string());
  try {
    auto t = transcript_from_json(doc);
    if (t.request_hash != hash) {
      throw ParseError("transcript is filed under the wrong hash");
    }
    return t;
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void TranscriptStore::save(const LlmTranscript& t) const {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw IoError("cannot create transcript directory " + dir_.string());
  write_file_atomic(path_for(t.request_hash), transcript_to_json(t).dump(2) + "\n");
}

ChatReply ReplayChatClient::complete(const ChatRequest& req) {
  const std::string hash = request_hash(req);
  auto t = store_.load(hash);
  if (!t) throw ReplayMissError(hash);
  return {t->response, hash};
}

std::string api_key_from_env() {
  const char* v = std::getenv(kApiKeyEnvVar);
  return v ? std::string(v) : std::string();
}

HttpChatClient::HttpChatClient(HttpChatConfig config, Sleeper sleeper)
    : config_(std::move(config)), sleep_(std::move(sleeper)) {
  if (!sleep_) {
    sleep_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  }
  detail::split_url(config_.base_url);
}

ChatReply HttpChatClient::complete(const ChatRequest& req) {
  const json body = chat_request_json(req);
  const std::string payload = body.dump();
  const auto ep = detail::split_url(config_.base_url);
  httplib::Headers headers;
  if (!config_.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + config_.api_key);
  }

  std::string last_error;
  auto backoff = config_.retry.initial_backoff;
  for (int attempt = 0; attempt <= config_.retry.max_retries; ++attempt) {
    if (attempt > 0) {
      sleep_(backoff);
      backoff *= 2;
    }
    auto cli = detail::make_client(ep, config_.timeout);
    auto res = cli->Post(ep.path_prefix + "/chat/completions", headers, payload, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw TransportError("chat endpoint returned HTTP " + std::to_string(res->status) + ": " +
                           res->body.substr(0, 200));
    }
    try {
      const json reply = json::parse(res->body);
      return {reply.at("choices").at(0).at("message").at("content").get<std::string>(), request_hash(body)};
    } catch (const json::exception& e) {
      throw ProtocolError(std::string("malformed chat completion response: ") + e.what());
    }
  }
  throw TransportError("chat request failed after " + std::to_string(config_.retry.max_retries + 1) +
                       " attempts: " + last_error);
}

ChatReply RecordingChatClient::complete(const ChatRequest& req) {
  ChatReply reply = inner_.complete(req);
  LlmTranscript t;
  t.request = chat_request_json(req);
  t.request_hash = request_hash(t.request);
  t.response = reply.content;
  t.model_id = req.model;
  t.timestamp = utc_timestamp();
  store_.save(t);
  reply.request_hash = t.request_hash;
  return reply;
}

}  // namespace dvs
