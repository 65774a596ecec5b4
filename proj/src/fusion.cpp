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

#include "dvs/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "dvs/error.hpp"
#include "dvs/matcher.hpp"

namespace dvs {

namespace {

// Box-Muller over raw mt19937_64 output. std::normal_distribution is not
// specified bit-for-bit across standard libraries; this is.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : rng_(seed) {}

  double next() {
    if (spare_) {
      const double v = *spare_;
      spare_.reset();
      return v;
    }
    // (0, 1]: avoids log(0).
    const double u1 = (static_cast<double>(rng_() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    return r * std::cos(theta);
  }

 private:
  std::mt19937_64 rng_;
  std::optional<double> spare_;
};

constexpr std::array<std::string_view, 3> kModeNames = {"base", "text", "image"};

}  // namespace

const std::vector<float>* LabelTable::find(const std::string& class_name) const {
  auto it = entries.find(class_name);
  return it == entries.end() ? nullptr : &it->second;
}

LabelTable build_label_table(const std::vector<std::string>& class_names, std::uint32_t label_dim,
                             std::uint64_t seed) {
  if (label_dim == 0) throw ValidationError("label_dim must be >= 1");
  LabelTable t;
  t.label_dim = label_dim;
  t.seed = seed;
  NormalStream normal(seed);
  for (const auto& name : class_names) {
    if (t.entries.count(name)) throw ValidationError("duplicate class name in label table: " + name);
    std::vector<float> v(label_dim);
    for (auto& x : v) x = static_cast<float>(kLabelInitStddev * normal.next());
    t.entries.emplace(name, std::move(v));
    t.class_order.push_back(name);
  }
  return t;
}

std::string_view fusion_mode_name(FusionMode m) noexcept { return kModeNames[static_cast<std::size_t>(m)]; }

std::optional<FusionMode> parse_fusion_mode(std::string_view name) noexcept {
  for (std::size_t i = 0; i < kModeNames.size(); ++i) {
    if (kModeNames[i] == name) return static_cast<FusionMode>(i);
  }
  return std::nullopt;
}

ConditioningVector fuse(FusionMode mode, const std::string& class_name, const LabelTable& table,
                        std::optional<std::span<const float>> feature) {
  const auto* label = table.find(class_name);
  if (!label) throw ValidationError("class not in label table: " + class_name);
  if (mode == FusionMode::kBase && feature) {
    throw ValidationError("base conditioning takes no feature");
  }
  if (mode != FusionMode::kBase && !feature) {
    throw ValidationError(std::string(fusion_mode_name(mode)) + " conditioning needs a feature vector");
  }
  ConditioningVector out{class_name, mode, *label};
  if (feature) out.values.insert(out.values.end(), feature->begin(), feature->end());
  return out;
}

ConditioningVector Fuser::operator()(FusionMode mode, const std::string& class_name,
                                     std::optional<std::span<const float>> feature) {
  if (feature) {
    auto [it, inserted] = feature_dims_.emplace(mode, feature->size());
    if (!inserted && it->second != feature->size()) {
      throw DimensionError(std::string(fusion_mode_name(mode)) + " feature dim changed from " +
                           std::to_string(it->second) + " to " + std::to_string(feature->size()));
    }
  }
  return fuse(mode, class_name, table_, feature);
}

EmbeddingSet build_conditioning_set(const DatasetManifest& manifest, const LabelTable& table,
                                    const EmbeddingSet* text_set, const EmbeddingSet* image_set, FusionMode mode) {
  if (mode == FusionMode::kText && !text_set) throw ValidationError("text mode needs a text embedding set");
  if (mode == FusionMode::kImage && !image_set) throw ValidationError("image mode needs an image embedding set");

  Fuser fuser(table);
  std::vector<EmbeddingRecord> records;
  for (const auto& c : manifest.classes) {
    for (const auto& s : c.subcategories) {
      std::optional<std::span<const float>> feature;
      if (mode == FusionMode::kText) {
        const std::string key = subcategory_key(c.class_name, s.name);
        const auto* v = text_set->find(key);
        if (!v) throw ValidationError("missing text feature for subcategory " + key);
        feature = std::span<const float>(*v);
      } else if (mode == FusionMode::kImage) {
        const auto* v = image_set->find(s.representative_frame);
        if (!v) {
          throw ValidationError("missing image feature for representative frame '" + s.representative_frame +
                                "' of " + subcategory_key(c.class_name, s.name));
        }
        feature = std::span<const float>(*v);
      }
      const ConditioningVector cv = fuser(mode, c.class_name, feature);
      for (const auto& clip : s.clip_ids) records.push_back({clip, cv.values});
    }
  }
  std::sort(records.begin(), records.end(),
            [](const EmbeddingRecord& a, const EmbeddingRecord& b) { return a.id < b.id; });
  std::uint32_t dim = table.label_dim;
  if (mode == FusionMode::kText) dim += text_set->dim();
  if (mode == FusionMode::kImage) dim += image_set->dim();
  return EmbeddingSet(Modality::kFused, dim, std::move(records));
}

std::size_t export_conditioning(const DatasetManifest& manifest, const LabelTable& table,
                                const EmbeddingSet* text_set, const EmbeddingSet* image_set, FusionMode mode,
                                const std::filesystem::path& path) {
  const EmbeddingSet set = build_conditioning_set(manifest, table, text_set, image_set, mode);
  write_embeddings(set, path);
  return set.size();
}

EmbeddingSet label_table_set(const LabelTable& table) {
  std::vector<EmbeddingRecord> records;
  for (const auto& name : table.class_order) records.push_back({name, table.entries.at(name)});
  return EmbeddingSet(Modality::kFused, table.label_dim, std::move(records));
}

}  // namespace dvs
