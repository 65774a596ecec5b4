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

#pragma once

// Chat-completion backends: a live client for OpenAI-compatible endpoints,
// a replay client that answers from recorded transcripts, and a recorder
// that writes transcripts while forwarding to another backend.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace dvs {

struct ChatMessage {
  std::string role;
  std::string content;

  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

struct ChatRequest {
  std::string model;
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
  std::optional<std::int64_t> seed;
};

/// Request body as sent over the wire: {model, messages, temperature[, seed]}.
nlohmann::json chat_request_json(const ChatRequest& req);

/// Sorted-key compact serialization of chat_request_json; the hash input.
std::string canonical_request(const nlohmann::json& request);
/// SHA-256 hex of canonical_request.
std::string request_hash(const ChatRequest& req);
std::string request_hash(const nlohmann::json& request);

struct ChatReply {
  std::string content;
  std::string request_hash;
};

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual ChatReply complete(const ChatRequest& req) = 0;
};

struct LlmTranscript {
  std::string request_hash;
  nlohmann::json request;
  std::string response;
  std::string model_id;
  std::string timestamp;
};

nlohmann::ordered_json transcript_to_json(const LlmTranscript& t);
/// Throws ParseError when fields are missing or the stored hash does not
/// match the recomputed one.
LlmTranscript transcript_from_json(const nlohmann::json& j);

/// Directory of <request_hash>.json transcript files. Concurrent saves of
/// distinct hashes are safe (each goes through an atomic rename).
class TranscriptStore {
 public:
  explicit TranscriptStore(std::filesystem::path dir);

  const std::filesystem::path& dir() const noexcept { return dir_; }
  std::filesystem::path path_for(const std::string& hash) const;
  std::optional<LlmTranscript> load(const std::string& hash) const;
  void save(const LlmTranscript& t) const;

 private:
  std::filesystem::path dir_;
};

class ReplayChatClient : public ChatBackend {
 public:
  explicit ReplayChatClient(TranscriptStore store) : store_(std::move(store)) {}
  /// Throws ReplayMissError naming the hash when no transcript exists.
  ChatReply complete(const ChatRequest& req) override;

 private:
  TranscriptStore store_;
};

struct RetryPolicy {
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{1000};
};

struct HttpChatConfig {
  std::string base_url;
  /// Bearer token; empty sends no Authorization header.
  std::string api_key;
  RetryPolicy retry;
  std::chrono::milliseconds timeout{60000};
};

inline constexpr const char* kApiKeyEnvVar = "DIVESOUND_LLM_API_KEY";

/// Reads the bearer token from DIVESOUND_LLM_API_KEY ("" when unset).
std::string api_key_from_env();

/// POST {base_url}/chat/completions. Transport failures, HTTP 429 and 5xx
/// are retried with exponential backoff (initial, 2x, 4x, ...).
class HttpChatClient : public ChatBackend {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  explicit HttpChatClient(HttpChatConfig config, Sleeper sleeper = {});
  ChatReply complete(const ChatRequest& req) override;

 private:
  HttpChatConfig config_;
  Sleeper sleep_;
};

/// Forwards to `inner` and saves a transcript for every completed request.
class RecordingChatClient : public ChatBackend {
 public:
  RecordingChatClient(ChatBackend& inner, TranscriptStore store) : inner_(inner), store_(std::move(store)) {}
  ChatReply complete(const ChatRequest& req) override;

 private:
  ChatBackend& inner_;
  TranscriptStore store_;
};

}  // namespace dvs
