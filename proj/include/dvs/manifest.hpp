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
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace dvs {

/// A subcategory that survived matching and filtering.
struct ManifestSubcategory {
  std::string name;
  /// Sorted ascending.
  std::vector<std::string> clip_ids;
  /// Frame id ("{clip}#frame{k}") of the representative image; empty when
  /// the subcategory has no clips.
  std::string representative_frame;
  double representative_similarity = 0.0;

  friend bool operator==(const ManifestSubcategory&, const ManifestSubcategory&) = default;
};

struct ManifestClass {
  std::string class_name;
  std::vector<ManifestSubcategory> subcategories;

  friend bool operator==(const ManifestClass&, const ManifestClass&) = default;
};

inline constexpr std::string_view kDropBelowMinClips = "below_min_clips";
inline constexpr std::string_view kDropTooFewSubcategories = "too_few_subcategories";

struct DroppedSubcategory {
  std::string class_name;
  std::string name;
  std::vector<std::string> clip_ids;
  std::string reason;

  std::size_t clip_count() const noexcept { return clip_ids.size(); }

  friend bool operator==(const DroppedSubcategory&, const DroppedSubcategory&) = default;
};

struct DatasetManifest {
  int taxonomy_version = 1;
  std::vector<ManifestClass> classes;
  std::vector<DroppedSubcategory> dropped_subcategories;
  std::vector<std::string> unmatched_clips;

  std::size_t retained_clip_count() const noexcept;
  std::size_t dropped_clip_count() const noexcept;
  /// retained + dropped + unmatched
  std::size_t total_clip_count() const noexcept;

  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

struct ManifestSummary {
  std::size_t class_count = 0;
  /// Retained subcategories per class, rounded to 4 decimals; 0 without classes.
  double mean_subcategories = 0.0;
  /// Retained clips.
  std::size_t total_clips = 0;
  /// Dropped subcategories.
  std::size_t dropped_count = 0;
  std::size_t dropped_clips = 0;
  std::size_t unmatched_count = 0;
};

ManifestSummary summarize(const DatasetManifest& m);

/// Invariant violations: a clip listed twice anywhere, a retained
/// subcategory below `min_clips`.
std::vector<std::string> validate_manifest(const DatasetManifest& m, std::size_t min_clips);

/// JSON Lines: one line per retained class, then one summary line carrying
/// the counts plus dropped subcategories and unmatched clips.
std::string manifest_to_jsonl(const DatasetManifest& m);
/// Throws ParseError with a line number on malformed input or when the
/// summary counts disagree with the body.
DatasetManifest manifest_from_jsonl(std::string_view text, std::string_view what = "manifest");

void save_manifest(const DatasetManifest& m, const std::filesystem::path& path);
DatasetManifest load_manifest(const std::filesystem::path& path);

}  // namespace dvs
