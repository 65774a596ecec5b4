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

// Cross-modal matching of clips to subcategories.
//
// Image channel: every sampled frame is scored against the plain
// subcategory texts (softmax over scaled cosine similarity), the per-frame
// distributions are aggregated and the argmax taken. Audio channel: the clip
// embedding is compared with adjective-augmented subcategory texts and the
// most similar one wins. A clip is assigned only when both channels agree.
// Ties always resolve to the lowest index / smallest id.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dvs/embedding_io.hpp"
#include "dvs/manifest.hpp"
#include "dvs/taxonomy.hpp"

namespace dvs {

using Vector = std::vector<float>;

/// dot(a,b)/(|a||b|); 0 when either norm is below 1e-12. Throws
/// DimensionError when sizes differ.
double cosine_similarity(std::span<const float> a, std::span<const float> b);

/// "{name}, {adj1}, {adj2}[, ...]"
std::string augment_subcategory_text(const Subcategory& s);

/// Key under which per-subcategory text vectors are stored: "{class}/{subcategory}".
std::string subcategory_key(std::string_view class_name, std::string_view subcategory);

enum class FrameAggregation { kMean, kMax };

inline constexpr double kDefaultSoftmaxScale = 100.0;
inline constexpr std::size_t kDefaultMinClips = 20;

struct FrameClassification {
  /// On the simplex: each entry >= 0, sum 1.
  std::vector<double> probabilities;
  std::size_t choice = 0;
};

/// Requires >= 1 frame, >= 2 texts and scale > 0 (ValidationError).
FrameClassification classify_frames(std::span<const Vector> frames, std::span<const Vector> texts,
                                    double scale = kDefaultSoftmaxScale,
                                    FrameAggregation aggregation = FrameAggregation::kMean);

struct AudioClassification {
  std::size_t choice = 0;
  std::vector<double> similarities;
};

AudioClassification classify_audio(std::span<const float> audio, std::span<const Vector> texts);

struct ClipFrame {
  FrameRef ref;
  Vector values;
};

struct ClipBundle {
  std::string clip_id;
  std::string class_name;
  Vector audio;
  std::vector<ClipFrame> frames;
};

/// Text vectors of one class, both lists in the class's subcategory order.
struct ClassTexts {
  std::vector<std::string> subcategory_names;
  std::vector<Vector> plain;
  std::vector<Vector> augmented;
};

struct MatchRecord {
  std::string clip_id;
  std::size_t image_choice = 0;
  std::vector<double> image_probabilities;
  std::size_t audio_choice = 0;
  bool agreed = false;
  std::optional<std::string> assigned;
};

struct MatchOptions {
  double scale = kDefaultSoftmaxScale;
  FrameAggregation aggregation = FrameAggregation::kMean;
};

MatchRecord match_clip(const ClipBundle& bundle, const ClassTexts& texts, const MatchOptions& options = {});

struct Representative {
  FrameRef frame;
  double similarity = 0.0;
};

/// Frame with the highest cosine similarity to `text` over all frames of
/// `clips`; ties go to the lexicographically smallest frame id. Throws
/// ValidationError for an empty list.
Representative select_representative_image(std::span<const ClipBundle* const> clips, std::span<const float> text);
Representative select_representative_image(std::span<const ClipBundle> clips, std::span<const float> text);

struct FilterOptions {
  std::size_t min_clips = kDefaultMinClips;
  bool keep_singleton_classes = false;
};

/// Moves subcategories with fewer than `min_clips` clips to the dropped
/// list. A class left with fewer than two subcategories loses the rest too
/// and disappears (unless keep_singleton_classes keeps one survivor).
/// Clip counts are conserved and the operation is idempotent.
DatasetManifest filter_subclasses(DatasetManifest manifest, const FilterOptions& options = {});

struct BuildOptions {
  FilterOptions filter;
  MatchOptions match;
  /// Frames per clip fed to the image channel; 0 uses every frame. When a
  /// clip has more, a subset is drawn with a per-clip seed derived from
  /// `seed` and the clip id.
  std::size_t frames_per_clip = 0;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

struct BuildResult {
  DatasetManifest manifest;
  /// One per clip, sorted by clip id.
  std::vector<MatchRecord> records;
};

/// Full matching pipeline.
///
/// `clip_classes` maps every clip id in `audio` to its class. Frames are
/// looked up by "{clip}#frame{k}" ids; both text sets hold one vector per
/// subcategory under subcategory_key(). Output is a pure function of the
/// inputs; `threads` does not affect it.
BuildResult build_dataset(const Taxonomy& taxonomy, const EmbeddingSet& audio, const EmbeddingSet& frames,
                          const EmbeddingSet& text, const EmbeddingSet& augmented_text,
                          const std::map<std::string, std::string>& clip_classes,
                          const BuildOptions& options = {});

/// Reads "clip_id<TAB>class_name" lines (blank and '#' lines skipped).
std::map<std::string, std::string> read_clip_classes(const std::filesystem::path& path);

}  // namespace dvs
