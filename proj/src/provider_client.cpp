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

#include "dvs/provider_client.hpp"

#include <algorithm>
#include <future>
#include <unordered_map>
#include <unordered_set>

#include "dvs/error.hpp"
#include "dvs/json_util.hpp"
#include "http_util.hpp"

namespace dvs {

using nlohmann::json;

EmbeddingProvider::EmbeddingProvider(std::string base_url, ProviderOptions options)
    : base_url_(std::move(base_url)), options_(options) {
  if (options_.batch_size == 0 || options_.parallelism == 0) {
    throw ValidationError("batch_size and parallelism must be >= 1");
  }
  detail::split_url(base_url_);
}

bool EmbeddingProvider::health() const {
  const auto ep = detail::split_url(base_url_);
  auto cli = detail::make_client(ep, options_.timeout);
  auto res = cli->Get(ep.path_prefix + "/v1/health");
  if (!res) {
    throw TransportError("provider health check failed: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) return false;
  try {
    const auto body = json::parse(res->body);
    return body.value("status", "") == "ok";
  } catch (const json::exception&) {
    return false;
  }
}

EmbeddingProvider::Batch EmbeddingProvider::fetch_batch(Modality modality,
                                                        std::span<const ProviderItem> items) const {
  json req;
  req["modality"] = modality_name(modality);
  json jitems = json::array();
  for (const auto& it : items) {
    json ji;
    ji["id"] = it.id;
    if (it.text) ji["text"] = *it.text;
    if (it.uri) ji["uri"] = *it.uri;
    jitems.push_back(std::move(ji));
  }
  req["items"] = std::move(jitems);

  const auto ep = detail::split_url(base_url_);
  auto cli = detail::make_client(ep, options_.timeout);
  auto res = cli->Post(ep.path_prefix + "/v1/embed", req.dump(), "application/json");
  if (!res) {
    throw TransportError("embedding request failed: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw TransportError("embedding provider returned HTTP " + std::to_string(res->status) + ": " +
                         res->body.substr(0, 200));
  }

  json body;
  try {
    body = json::parse(res->body);
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("provider response is not JSON: ") + e.what());
  }
  Batch batch;
  try {
    namespace ju = json_util;
    const auto dim = ju::require_int(body, "dim", "response");
    if (dim < 1 || dim > std::numeric_limits<std::uint32_t>::max()) {
      throw ProtocolError("response.dim out of range: " + std::to_string(dim));
    }
    batch.dim = static_cast<std::uint32_t>(dim);
    batch.model = body.value("model", "");
    const auto& vectors = ju::require_array(body, "vectors", "response");

    std::unordered_map<std::string, std::size_t> wanted;
    for (std::size_t i = 0; i < items.size(); ++i) wanted.emplace(items[i].id, i);
    std::vector<std::optional<std::vector<float>>> slots(items.size());
    for (std::size_t k = 0; k < vectors.size(); ++k) {
      const std::string vp = ju::index_path("response.vectors", k);
      const std::string id = ju::require_string(vectors[k], "id", vp);
      const auto& values = ju::require_array(vectors[k], "values", vp);
      auto it = wanted.find(id);
      if (it == wanted.end()) {
        throw ProtocolError("provider returned unrequested id: " + id);
      }
      auto& slot = slots[it->second];
      if (slot) {
        throw ProtocolError("provider returned id twice: " + id);
      }
      if (values.size() != batch.dim) {
        throw ProtocolError("vector for " + id + " has " + std::to_string(values.size()) +
                            " values, response declared dim " + std::to_string(batch.dim));
      }
      std::vector<float> v;
      v.reserve(values.size());
      for (const auto& x : values) {
        if (!x.is_number()) throw ProtocolError("non-numeric value in vector for " + id);
        v.push_back(x.get<float>());
      }
      slot = std::move(v);
    }
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (!slots[i]) {
        throw ProtocolError("provider response is missing id: " + items[i].id);
      }
      batch.records.push_back({items[i].id, std::move(*slots[i])});
    }
  } catch (const ProtocolError&) {
    throw;
  } catch (const ParseError& e) {
    throw ProtocolError(e.what());
  }
  return batch;
}

void EmbeddingProvider::check_dim(Modality modality, std::uint32_t dim) {
  std::lock_guard lock(mu_);
  auto [it, inserted] = session_dims_.emplace(modality, dim);
  if (!inserted && it->second != dim) {
    throw ProtocolError("dim mismatch for " + std::string(modality_name(modality)) + ": session has " +
                        std::to_string(it->second) + ", provider returned " + std::to_string(dim));
  }
}

EmbeddingSet EmbeddingProvider::fetch(Modality modality, std::span<const ProviderItem> items) {
  if (modality == Modality::kFused) {
    throw ValidationError("the provider does not embed fused vectors");
  }
  std::unordered_set<std::string_view> ids;
  for (const auto& it : items) {
    if (!ids.insert(it.id).second) throw ValidationError("duplicate item id in request: " + it.id);
  }
  std::vector<std::span<const ProviderItem>> chunks;
  for (std::size_t start = 0; start < items.size(); start += options_.batch_size) {
    chunks.push_back(items.subspan(start, std::min(options_.batch_size, items.size() - start)));
  }

  std::vector<Batch> results(chunks.size());
  for (std::size_t wave = 0; wave < chunks.size(); wave += options_.parallelism) {
    const std::size_t end = std::min(chunks.size(), wave + options_.parallelism);
    std::vector<std::future<Batch>> pending;
    for (std::size_t c = wave; c < end; ++c) {
      pending.push_back(std::async(std::launch::async, [this, modality, chunk = chunks[c]] {
        return fetch_batch(modality, chunk);
      }));
    }
    for (std::size_t c = wave; c < end; ++c) results[c] = pending[c - wave].get();
  }

  std::vector<EmbeddingRecord> records;
  records.reserve(items.size());
  std::optional<std::uint32_t> dim;
  {
    std::lock_guard lock(mu_);
    if (auto it = session_dims_.find(modality); it != session_dims_.end()) dim = it->second;
  }
  for (auto& b : results) {
    check_dim(modality, b.dim);
    dim = b.dim;
    {
      std::lock_guard lock(mu_);
      models_[modality] = b.model;
    }
    for (auto& r : b.records) records.push_back(std::move(r));
  }
  if (!dim) {
    throw ValidationError("cannot determine embedding dim: no items requested and no prior call");
  }
  return EmbeddingSet(modality, *dim, std::move(records));
}

std::optional<std::string> EmbeddingProvider::model(Modality modality) const {
  std::lock_guard lock(mu_);
  auto it = models_.find(modality);
  if (it == models_.end()) return std::nullopt;
  return it->second;
}

EmbeddingSet fetch_embeddings(const std::string& provider_url, Modality modality,
                              std::span<const ProviderItem> items) {
  EmbeddingProvider provider(provider_url);
  return provider.fetch(modality, items);
}

}  // namespace dvs
