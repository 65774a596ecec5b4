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

#include "dvs/config.hpp"

#include <initializer_list>

#include "dvs/error.hpp"
#include "dvs/io.hpp"
#include "dvs/json_util.hpp"

namespace dvs {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::string& path, std::initializer_list<std::string_view> known) {
  json_util::expect_object(obj, path);
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (auto k : known) ok = ok || k == key;
    if (!ok) throw ValidationError("config: unknown key " + json_util::join_path(path, key));
  }
}

template <typename T>
void read_unsigned(const json& obj, std::string_view key, const std::string& path, T& out) {
  if (!obj.contains(key)) return;
  const auto v = json_util::require_int(obj, key, path);
  if (v < 0) throw ValidationError("config: " + json_util::join_path(path, key) + " must be >= 0");
  out = static_cast<T>(v);
}

void read_string(const json& obj, std::string_view key, const std::string& path, std::string& out) {
  if (obj.contains(key)) out = json_util::require_string(obj, key, path);
}

}  // namespace

std::string_view frame_aggregation_name(FrameAggregation a) noexcept {
  return a == FrameAggregation::kMean ? "mean" : "max";
}

std::optional<FrameAggregation> parse_frame_aggregation(std::string_view name) noexcept {
  if (name == "mean") return FrameAggregation::kMean;
  if (name == "max") return FrameAggregation::kMax;
  return std::nullopt;
}

void validate_config(const PipelineConfig& c) {
  if (c.matching.min_clips < 1) throw ValidationError("config: matching.min_clips must be >= 1");
  if (!(c.matching.softmax_scale > 0.0)) throw ValidationError("config: matching.softmax_scale must be > 0");
  if (c.fusion.label_dim < 1) throw ValidationError("config: fusion.label_dim must be >= 1");
  if (c.llm.parallelism < 1) throw ValidationError("config: llm.parallelism must be >= 1");
  if (c.matching.threads < 1) throw ValidationError("config: matching.threads must be >= 1");
}

nlohmann::ordered_json config_to_json(const PipelineConfig& c) {
  nlohmann::ordered_json j;
  j["llm"]["base_url"] = c.llm.base_url;
  j["llm"]["model"] = c.llm.model;
  j["llm"]["parallelism"] = c.llm.parallelism;
  j["llm"]["replay_dir"] = c.llm.replay_dir ? json(*c.llm.replay_dir) : json(nullptr);
  j["llm"]["seed"] = c.llm.seed ? json(*c.llm.seed) : json(nullptr);
  j["matching"]["min_clips"] = c.matching.min_clips;
  j["matching"]["softmax_scale"] = c.matching.softmax_scale;
  j["matching"]["frame_agg"] = frame_aggregation_name(c.matching.frame_agg);
  j["matching"]["frames_per_clip"] = c.matching.frames_per_clip;
  j["matching"]["keep_singleton_classes"] = c.matching.keep_singleton_classes;
  j["matching"]["threads"] = c.matching.threads;
  j["matching"]["seed"] = c.matching.seed;
  j["fusion"]["label_dim"] = c.fusion.label_dim;
  j["fusion"]["seed"] = c.fusion.seed;
  j["paths"]["taxonomy"] = c.paths.taxonomy;
  j["paths"]["embeddings"] = c.paths.embeddings;
  j["paths"]["manifest"] = c.paths.manifest;
  j["paths"]["reports"] = c.paths.reports;
  return j;
}

PipelineConfig config_from_json(const json& j) {
  namespace ju = json_util;
  PipelineConfig c;
  reject_unknown(j, "", {"llm", "matching", "fusion", "paths"});
  if (j.contains("llm")) {
    const auto& l = j["llm"];
    reject_unknown(l, "llm", {"base_url", "model", "parallelism", "replay_dir", "seed"});
    read_string(l, "base_url", "llm", c.llm.base_url);
    read_string(l, "model", "llm", c.llm.model);
    read_unsigned(l, "parallelism", "llm", c.llm.parallelism);
    if (l.contains("replay_dir") && !l["replay_dir"].is_null()) {
      c.llm.replay_dir = ju::require_string(l, "replay_dir", "llm");
    }
    if (l.contains("seed") && !l["seed"].is_null()) c.llm.seed = ju::require_int(l, "seed", "llm");
  }
  if (j.contains("matching")) {
    const auto& m = j["matching"];
    reject_unknown(m, "matching",
                   {"min_clips", "softmax_scale", "frame_agg", "frames_per_clip", "keep_singleton_classes",
                    "threads", "seed"});
    read_unsigned(m, "min_clips", "matching", c.matching.min_clips);
    if (m.contains("softmax_scale")) c.matching.softmax_scale = ju::require_number(m, "softmax_scale", "matching");
    if (m.contains("frame_agg")) {
      const auto name = ju::require_string(m, "frame_agg", "matching");
      auto agg = parse_frame_aggregation(name);
      if (!agg) throw ValidationError("config: matching.frame_agg must be mean or max, got " + name);
      c.matching.frame_agg = *agg;
    }
    read_unsigned(m, "frames_per_clip", "matching", c.matching.frames_per_clip);
    if (m.contains("keep_singleton_classes")) {
      c.matching.keep_singleton_classes = ju::require_bool(m, "keep_singleton_classes", "matching");
    }
    read_unsigned(m, "threads", "matching", c.matching.threads);
    read_unsigned(m, "seed", "matching", c.matching.seed);
  }
  if (j.contains("fusion")) {
    const auto& f = j["fusion"];
    reject_unknown(f, "fusion", {"label_dim", "seed"});
    read_unsigned(f, "label_dim", "fusion", c.fusion.label_dim);
    read_unsigned(f, "seed", "fusion", c.fusion.seed);
  }
  if (j.contains("paths")) {
    const auto& p = j["paths"];
    reject_unknown(p, "paths", {"taxonomy", "embeddings", "manifest", "reports"});
    read_string(p, "taxonomy", "paths", c.paths.taxonomy);
    read_string(p, "embeddings", "paths", c.paths.embeddings);
    read_string(p, "manifest", "paths", c.paths.manifest);
    read_string(p, "reports", "paths", c.paths.reports);
  }
  validate_config(c);
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  const auto doc = json_util::parse(read_file(path), path.string());
  try {
    return config_from_json(doc);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace dvs
