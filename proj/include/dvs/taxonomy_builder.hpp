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

// Two-stage taxonomy construction driven by a chat model: labels of each
// overarching category are clustered into sound classes, then every class
// is split into subcategories that differ both visually and auditorily.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dvs/chat_client.hpp"
#include "dvs/taxonomy.hpp"
#include "json.hpp"

namespace dvs {

enum class PromptStage { kCluster, kSubcategorize };

/// Prompt text with named placeholders {category}, {labels}, {class_name}.
/// The system part comes first; a line "=== user ===" starts the user part.
struct PromptTemplate {
  PromptStage stage = PromptStage::kCluster;
  std::string template_text;

  static PromptTemplate builtin(PromptStage stage);
  /// Reads a template file and checks its placeholders (ValidationError).
  static PromptTemplate load(PromptStage stage, const std::filesystem::path& path);

  /// Required placeholders absent from template_text.
  std::vector<std::string> missing_placeholders() const;
};

inline constexpr std::string_view kUserSeparator = "=== user ===";

/// Throws ValidationError for an empty label list or unknown category.
std::vector<ChatMessage> build_cluster_prompt(
    std::string_view category, const std::vector<std::string>& labels,
    const PromptTemplate& tmpl = PromptTemplate::builtin(PromptStage::kCluster));

/// Throws ValidationError for an empty class name or no source labels.
std::vector<ChatMessage> build_subcategory_prompt(
    const SoundClass& sound_class,
    const PromptTemplate& tmpl = PromptTemplate::builtin(PromptStage::kSubcategorize));

/// First balanced `{...}` in `raw` that parses as a JSON object. Prose and
/// code fences around it are ignored.
std::optional<nlohmann::json> extract_first_json_object(std::string_view raw);

struct Cluster {
  std::string class_name;
  std::vector<std::string> member_labels;
};

struct ClusterResult {
  std::string category;
  std::vector<Cluster> clusters;
  /// Labels the model discarded, plus input labels it did not mention.
  std::vector<std::string> discarded_labels;
};

/// Throws ParseError (no JSON, schema mismatch, a label in two clusters) or
/// HallucinationError (a label not present in `input_labels`).
ClusterResult parse_cluster_response(std::string_view raw, const std::vector<std::string>& input_labels);

struct SubcategoryParse {
  /// Items that satisfy every subcategory invariant, in response order.
  std::vector<Subcategory> subcategories;
  /// One message per rejected item.
  std::vector<std::string> violations;
};

/// Throws ParseError when no JSON object or no `subcategories` array exists;
/// per-item problems land in `violations`.
SubcategoryParse parse_subcategory_response(std::string_view raw);

struct PipelineOptions {
  std::string model = "gpt-4";
  std::size_t parallelism = 1;
  std::optional<std::int64_t> seed;
  PromptTemplate cluster_template = PromptTemplate::builtin(PromptStage::kCluster);
  PromptTemplate subcategory_template = PromptTemplate::builtin(PromptStage::kSubcategorize);
};

struct PipelineResult {
  Taxonomy taxonomy;
  /// Human-readable record of dropped classes and discarded labels.
  std::vector<std::string> notes;
};

/// Clusters every category present in `labels`, subcategorizes every
/// resulting class and keeps the classes with >= 2 valid subcategories.
/// Categories may run concurrently; output order follows the fixed category
/// order, so the result does not depend on completion order.
PipelineResult run_taxonomy_pipeline(const std::vector<SourceLabel>& labels, ChatBackend& backend,
                                     const PipelineOptions& options = {});

/// Reads "category<TAB>label" lines; blank lines and '#' comments skipped.
std::vector<SourceLabel> read_label_file(const std::filesystem::path& path);

}  // namespace dvs
