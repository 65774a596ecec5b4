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

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace dvs {

/// The nine overarching categories source labels are grouped under.
enum class Category { kAnimals, kHome, kMusic, kNature, kPeople, kSports, kTools, kVehicle, kOthers };

inline constexpr std::array<Category, 9> kAllCategories = {
    Category::kAnimals, Category::kHome,  Category::kMusic,   Category::kNature, Category::kPeople,
    Category::kSports,  Category::kTools, Category::kVehicle, Category::kOthers};

std::string_view category_name(Category c) noexcept;
/// Exact, lowercase match against the closed set; nullopt otherwise.
std::optional<Category> parse_category(std::string_view name) noexcept;

struct SourceLabel {
  std::string text;
  Category category = Category::kOthers;

  friend bool operator==(const SourceLabel&, const SourceLabel&) = default;
};

inline constexpr std::size_t kMinAdjectives = 2;
inline constexpr std::size_t kMaxAdjectives = 4;

struct Subcategory {
  std::string name;
  std::vector<std::string> adjectives;
  std::optional<std::string> description;

  friend bool operator==(const Subcategory&, const Subcategory&) = default;
};

struct SoundClass {
  std::string name;
  std::vector<SourceLabel> source_labels;
  std::vector<Subcategory> subcategories;

  friend bool operator==(const SoundClass&, const SoundClass&) = default;
};

/// Who produced a taxonomy: the chat model and the hashes of every
/// transcript consumed, in request order.
struct Provenance {
  std::string model_id;
  std::vector<std::string> transcript_hashes;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

inline constexpr int kTaxonomySchemaVersion = 1;

struct Taxonomy {
  int version = kTaxonomySchemaVersion;
  std::optional<Provenance> provenance;
  std::vector<SoundClass> classes;

  const SoundClass* find(std::string_view class_name) const noexcept;

  friend bool operator==(const Taxonomy&, const Taxonomy&) = default;
};

/// One entry per violated invariant; empty iff the taxonomy is valid.
std::vector<std::string> validate_taxonomy(const Taxonomy& t);

/// Non-fatal findings, currently classes with a single subcategory.
std::vector<std::string> taxonomy_warnings(const Taxonomy& t);

struct TaxonomyStats {
  std::size_t class_count = 0;
  std::size_t total_subcategories = 0;
  /// Rounded to 4 decimals.
  double mean_subcategories = 0.0;
  /// subcategory count -> names of the classes with that count
  std::map<std::size_t, std::vector<std::string>> subcategory_histogram;
};

/// Throws ValidationError("no classes") on an empty taxonomy.
TaxonomyStats taxonomy_stats(const Taxonomy& t);

double round4(double x) noexcept;

nlohmann::ordered_json taxonomy_to_json(const Taxonomy& t);
/// Throws ParseError (with a field path) or VersionError.
Taxonomy taxonomy_from_json(const nlohmann::json& j);

/// Refuses to write an invalid taxonomy (ValidationError).
void save_taxonomy(const Taxonomy& t, const std::filesystem::path& path);
Taxonomy load_taxonomy(const std::filesystem::path& path);

}  // namespace dvs
