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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "dvs/matcher.hpp"
#include "json.hpp"

namespace dvs {

/// Every tunable of the command-line pipeline. Loaded from one JSON file;
/// command-line flags override individual fields.
struct PipelineConfig {
  struct Llm {
    std::string base_url = "https://api.openai.com/v1";
    std::string model = "gpt-4";
    std::size_t parallelism = 1;
    std::optional<std::string> replay_dir;
    std::optional<std::int64_t> seed;
  } llm;

  struct Matching {
    std::size_t min_clips = kDefaultMinClips;
    double softmax_scale = kDefaultSoftmaxScale;
    FrameAggregation frame_agg = FrameAggregation::kMean;
    std::size_t frames_per_clip = 3;
    bool keep_singleton_classes = false;
    std::size_t threads = 1;
    std::uint64_t seed = 0;
  } matching;

  struct Fusion {
    std::uint32_t label_dim = 128;
    std::uint64_t seed = 0;
  } fusion;

  struct Paths {
    std::string taxonomy = "taxonomy.json";
    std::string embeddings = "embeddings";
    std::string manifest = "manifest.jsonl";
    /// Directory for metric reports; empty prints to stdout only.
    std::string reports;
  } paths;
};

/// Throws ValidationError when an invariant fails (min_clips >= 1,
/// softmax_scale > 0, label_dim >= 1, parallelism >= 1).
void validate_config(const PipelineConfig& c);

nlohmann::ordered_json config_to_json(const PipelineConfig& c);

/// Starts from defaults; fields present in `j` replace them. Unknown keys
/// are rejected so typos do not pass silently.
PipelineConfig config_from_json(const nlohmann::json& j);
PipelineConfig load_config(const std::filesystem::path& path);

std::string_view frame_aggregation_name(FrameAggregation a) noexcept;
std::optional<FrameAggregation> parse_frame_aggregation(std::string_view name) noexcept;

}  // namespace dvs
