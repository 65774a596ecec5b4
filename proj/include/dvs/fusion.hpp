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

// Conditioning vectors for downstream generators. Every class gets a label
// embedding from a seeded lookup table; the text and image modes append the
// subcategory's text feature or representative-frame feature to it.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dvs/embedding_io.hpp"
#include "dvs/manifest.hpp"

namespace dvs {

inline constexpr std::uint32_t kDefaultLabelDim = 128;
inline constexpr double kLabelInitStddev = 0.02;

struct LabelTable {
  std::uint32_t label_dim = kDefaultLabelDim;
  std::uint64_t seed = 0;
  /// Class names in the order entries were drawn.
  std::vector<std::string> class_order;
  std::map<std::string, std::vector<float>> entries;

  const std::vector<float>* find(const std::string& class_name) const;
};

/// Entries are i.i.d. normal(0, 0.02^2) draws from a seeded mt19937_64,
/// consumed in `class_names` order, so the table is reproducible bit for
/// bit from (names, label_dim, seed). Throws ValidationError on duplicate
/// names or label_dim == 0.
LabelTable build_label_table(const std::vector<std::string>& class_names, std::uint32_t label_dim,
                             std::uint64_t seed);

enum class FusionMode { kBase, kText, kImage };

std::string_view fusion_mode_name(FusionMode m) noexcept;
std::optional<FusionMode> parse_fusion_mode(std::string_view name) noexcept;

struct ConditioningVector {
  std::string key;
  FusionMode mode = FusionMode::kBase;
  std::vector<float> values;
};

/// base: the label entry verbatim; text/image: label entry followed by
/// `feature`. Throws ValidationError for an unknown class or when a feature
/// is given for base / missing for text and image.
ConditioningVector fuse(FusionMode mode, const std::string& class_name, const LabelTable& table,
                        std::optional<std::span<const float>> feature = std::nullopt);

/// fuse() plus the rule that feature dims stay constant per mode.
class Fuser {
 public:
  explicit Fuser(const LabelTable& table) : table_(table) {}
  ConditioningVector operator()(FusionMode mode, const std::string& class_name,
                                std::optional<std::span<const float>> feature = std::nullopt);

 private:
  const LabelTable& table_;
  std::map<FusionMode, std::size_t> feature_dims_;
};

/// Writes one fused vector per retained clip (sorted by clip id) as a
/// fused-modality embedding file. text mode reads "{class}/{subcategory}"
/// vectors from `text_set`; image mode reads each subcategory's
/// representative frame from `image_set`. Returns the vector count.
std::size_t export_conditioning(const DatasetManifest& manifest, const LabelTable& table,
                                const EmbeddingSet* text_set, const EmbeddingSet* image_set, FusionMode mode,
                                const std::filesystem::path& path);

/// The same vectors export_conditioning writes, without touching disk.
EmbeddingSet build_conditioning_set(const DatasetManifest& manifest, const LabelTable& table,
                                    const EmbeddingSet* text_set, const EmbeddingSet* image_set, FusionMode mode);

/// The table as a fused-modality embedding set keyed by class name.
EmbeddingSet label_table_set(const LabelTable& table);

}  // namespace dvs
