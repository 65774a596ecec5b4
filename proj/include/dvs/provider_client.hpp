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

#include <chrono>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dvs/embedding_io.hpp"

namespace dvs {

/// One item to embed. Text items carry `text`; media items carry `uri`.
struct ProviderItem {
  std::string id;
  std::optional<std::string> text;
  std::optional<std::string> uri;
};

struct ProviderOptions {
  std::size_t batch_size = 64;
  std::size_t parallelism = 1;
  std::chrono::milliseconds timeout{30000};
};

/// Client for the embedding-provider protocol:
///   POST {base}/v1/embed  {modality, items:[{id, text|uri}]}
///        -> {dim, model, vectors:[{id, values}]}
///   GET  {base}/v1/health -> {status:"ok"}
///
/// A client instance is a session: once a modality has returned vectors of
/// some dim, later responses with a different dim are protocol errors.
class EmbeddingProvider {
 public:
  explicit EmbeddingProvider(std::string base_url, ProviderOptions options = {});

  /// True iff the provider answers {status:"ok"}. Throws TransportError when
  /// unreachable.
  bool health() const;

  /// Embeds `items` in request order. Throws TransportError, or
  /// ProtocolError for missing/unknown ids and dim inconsistencies.
  EmbeddingSet fetch(Modality modality, std::span<const ProviderItem> items);

  /// Model id reported by the last response for `modality`, if any.
  std::optional<std::string> model(Modality modality) const;

 private:
  struct Batch {
    std::uint32_t dim = 0;
    std::string model;
    std::vector<EmbeddingRecord> records;
  };
  Batch fetch_batch(Modality modality, std::span<const ProviderItem> items) const;
  void check_dim(Modality modality, std::uint32_t dim);

  std::string base_url_;
  ProviderOptions options_;
  mutable std::mutex mu_;
  std::map<Modality, std::uint32_t> session_dims_;
  std::map<Modality, std::string> models_;
};

/// One-shot convenience wrapper around EmbeddingProvider::fetch.
EmbeddingSet fetch_embeddings(const std::string& provider_url, Modality modality,
                              std::span<const ProviderItem> items);

}  // namespace dvs
