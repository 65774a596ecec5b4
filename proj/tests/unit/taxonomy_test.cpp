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

#include "dvs/taxonomy.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <functional>

#include "dvs/error.hpp"
#include "dvs/io.hpp"
#include "test_support.hpp"

namespace {

using dvs::Category;
using dvs::SoundClass;
using dvs::Subcategory;
using dvs::Taxonomy;
using dvs::testing::Gen;
using dvs::testing::TempDir;

SoundClass make_class(const std::string& name, std::size_t subs) {
  SoundClass c;
  c.name = name;
  c.source_labels.push_back({name + " sound", Category::kAnimals});
  for (std::size_t i = 0; i < subs; ++i) {
    c.subcategories.push_back({name + " variant " + std::to_string(i), {"loud", "sharp"}, std::nullopt});
  }
  return c;
}

Taxonomy two_classes() {
  Taxonomy t;
  t.classes = {make_class("dog", 2), make_class("cat", 3)};
  return t;
}

bool any_starts_with(const std::vector<std::string>& v, const std::string& prefix) {
  return std::any_of(v.begin(), v.end(), [&](const std::string& s) { return s.rfind(prefix, 0) == 0; });
}

TEST(Category, NamesRoundTrip) {
  for (auto c : dvs::kAllCategories) EXPECT_EQ(dvs::parse_category(dvs::category_name(c)), c);
  EXPECT_EQ(dvs::category_name(Category::kVehicle), "vehicle");
  EXPECT_FALSE(dvs::parse_category("Animals").has_value());
  EXPECT_FALSE(dvs::parse_category("").has_value());
}

TEST(ValidateTaxonomy, WellFormedIsEmpty) { EXPECT_TRUE(dvs::validate_taxonomy(two_classes()).empty()); }

TEST(ValidateTaxonomy, DuplicateClassName) {
  Taxonomy t;
  t.classes = {make_class("dog", 2), make_class("dog", 2)};
  t.classes[1].source_labels[0].text = "other";
  for (auto& s : t.classes[1].subcategories) s.name += "x";
  EXPECT_EQ(dvs::validate_taxonomy(t), std::vector<std::string>{"duplicate class name: dog"});
}

TEST(ValidateTaxonomy, FiveAdjectives) {
  Taxonomy t = two_classes();
  t.classes[0].subcategories[0].adjectives = {"a", "b", "c", "d", "e"};
  const auto v = dvs::validate_taxonomy(t);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_TRUE(any_starts_with(v, "adjective count out of range [2,4]")) << v[0];
}

TEST(ValidateTaxonomy, AdjectiveBoundaries) {
  for (std::size_t n : {2u, 3u, 4u}) {
    Taxonomy t = two_classes();
    t.classes[0].subcategories[0].adjectives.assign(n, "x");
    for (std::size_t i = 0; i < n; ++i) t.classes[0].subcategories[0].adjectives[i] += std::to_string(i);
    EXPECT_TRUE(dvs::validate_taxonomy(t).empty()) << n;
  }
  for (std::size_t n : {0u, 1u, 5u}) {
    Taxonomy t = two_classes();
    t.classes[0].subcategories[0].adjectives.assign(n, "x");
    EXPECT_TRUE(any_starts_with(dvs::validate_taxonomy(t), "adjective count out of range [2,4]")) << n;
  }
}

TEST(ValidateTaxonomy, SingletonIsWarningNotError) {
  Taxonomy t;
  t.classes = {make_class("dog", 1)};
  EXPECT_TRUE(dvs::validate_taxonomy(t).empty());
  EXPECT_EQ(dvs::taxonomy_warnings(t), std::vector<std::string>{"single subcategory: dog"});
}

// Each injected violation must surface as at least one matching entry.
TEST(ValidateTaxonomy, RandomizedSingleMutations) {
  struct Mutation {
    std::string prefix;
    std::function<void(Taxonomy&, Gen&)> apply;
  };
  const std::vector<Mutation> mutations = {
      {"duplicate class name",
       [](Taxonomy& t, Gen& g) {
         auto copy = t.classes[g.index(t.classes.size())];
         for (auto& l : copy.source_labels) l.text += " dup";
         t.classes.push_back(copy);
       }},
      {"adjective count out of range [2,4]",
       [](Taxonomy& t, Gen& g) {
         auto& s = t.classes[g.index(t.classes.size())].subcategories[0];
         s.adjectives.resize(g.coin() ? g.index(2) : 5 + g.index(3), "adj");
       }},
      {"empty class name", [](Taxonomy& t, Gen& g) { t.classes[g.index(t.classes.size())].name.clear(); }},
      {"no source labels",
       [](Taxonomy& t, Gen& g) { t.classes[g.index(t.classes.size())].source_labels.clear(); }},
      {"empty source label",
       [](Taxonomy& t, Gen& g) { t.classes[g.index(t.classes.size())].source_labels[0].text.clear(); }},
      {"source label in multiple classes",
       [](Taxonomy& t, Gen&) { t.classes[1].source_labels.push_back(t.classes[0].source_labels[0]); }},
      {"empty subcategory name",
       [](Taxonomy& t, Gen& g) { t.classes[g.index(t.classes.size())].subcategories[0].name.clear(); }},
      {"duplicate subcategory name",
       [](Taxonomy& t, Gen& g) {
         auto& c = t.classes[g.index(t.classes.size())];
         c.subcategories[1].name = c.subcategories[0].name;
       }},
      {"empty adjective",
       [](Taxonomy& t, Gen& g) {
         t.classes[g.index(t.classes.size())].subcategories[0].adjectives[0].clear();
       }},
      {"version must be >= 1", [](Taxonomy& t, Gen& g) { t.version = -static_cast<int>(g.index(3)); }},
  };
  Gen g(11);
  for (int trial = 0; trial < 300; ++trial) {
    Taxonomy t;
    const std::size_t n = 2 + g.index(5);
    for (std::size_t i = 0; i < n; ++i) {
      auto c = make_class("c" + std::to_string(i) + g.word(), 2 + g.index(3));
      for (auto& s : c.subcategories) {
        s.adjectives.clear();
        for (std::size_t k = 0, m = 2 + g.index(3); k < m; ++k) s.adjectives.push_back(g.word());
      }
      t.classes.push_back(std::move(c));
    }
    ASSERT_TRUE(dvs::validate_taxonomy(t).empty());
    const auto& m = mutations[g.index(mutations.size())];
    m.apply(t, g);
    const auto v = dvs::validate_taxonomy(t);
    EXPECT_TRUE(any_starts_with(v, m.prefix)) << "trial " << trial << " expected " << m.prefix;
  }
}

TEST(TaxonomyStats, Means) {
  auto with_counts = [](std::vector<std::size_t> counts) {
    Taxonomy t;
    for (std::size_t i = 0; i < counts.size(); ++i) t.classes.push_back(make_class("c" + std::to_string(i), counts[i]));
    return dvs::taxonomy_stats(t);
  };
  EXPECT_DOUBLE_EQ(with_counts({2, 3, 2}).mean_subcategories, 2.3333);
  EXPECT_DOUBLE_EQ(with_counts({2}).mean_subcategories, 2.0);
  const auto s = with_counts({2, 2, 2, 3, 3});
  EXPECT_DOUBLE_EQ(s.mean_subcategories, 2.4);
  EXPECT_EQ(s.class_count, 5u);
  EXPECT_EQ(s.total_subcategories, 12u);
  EXPECT_EQ(s.subcategory_histogram.at(2), (std::vector<std::string>{"c0", "c1", "c2"}));
  EXPECT_EQ(s.subcategory_histogram.at(3), (std::vector<std::string>{"c3", "c4"}));
}

TEST(TaxonomyStats, EmptyThrows) {
  try {
    dvs::taxonomy_stats(Taxonomy{});
    FAIL();
  } catch (const dvs::ValidationError& e) {
    EXPECT_STREQ(e.what(), "no classes");
  }
}

TEST(TaxonomyStats, MeanTimesCountIsTotal) {
  Gen g(5);
  for (int trial = 0; trial < 100; ++trial) {
    Taxonomy t;
    const std::size_t n = 1 + g.index(40);
    for (std::size_t i = 0; i < n; ++i) t.classes.push_back(make_class("c" + std::to_string(i), 1 + g.index(6)));
    const auto s = dvs::taxonomy_stats(t);
    std::size_t total = 0;
    for (const auto& c : t.classes) total += c.subcategories.size();
    EXPECT_EQ(s.total_subcategories, total);
    EXPECT_NEAR(s.mean_subcategories * n, static_cast<double>(total), 0.00005 * n + 1e-12);
  }
}

TEST(Round4, HalfAwayAndPlainCases) {
  EXPECT_DOUBLE_EQ(dvs::round4(7.0 / 3.0), 2.3333);
  EXPECT_DOUBLE_EQ(dvs::round4(2.0), 2.0);
  EXPECT_DOUBLE_EQ(dvs::round4(29.0 / 12.0), 2.4167);
}

TEST(TaxonomySerialization, RoundTrip) {
  TempDir dir;
  Taxonomy t;
  t.classes = {make_class("dog", 2), make_class("cat", 3), make_class("car", 2)};
  t.classes[1].subcategories[2].description = "a purring cat";
  t.classes[2].source_labels[0].category = Category::kVehicle;
  t.provenance = dvs::Provenance{"gpt-4", {"abc", "def"}};
  dvs::save_taxonomy(t, dir / "t.json");
  EXPECT_EQ(dvs::load_taxonomy(dir / "t.json"), t);
}

TEST(TaxonomySerialization, RandomRoundTrips) {
  Gen g(3);
  TempDir dir;
  for (int trial = 0; trial < 50; ++trial) {
    Taxonomy t;
    for (std::size_t i = 0, n = 1 + g.index(6); i < n; ++i) {
      auto c = make_class("c" + std::to_string(i) + " " + g.word(), 1 + g.index(4));
      c.source_labels[0].category = dvs::kAllCategories[g.index(9)];
      for (auto& s : c.subcategories) {
        if (g.coin()) s.description = g.word(0, 30) + " \"quoted\" \xc3\xa9";
      }
      t.classes.push_back(std::move(c));
    }
    if (g.coin()) t.provenance = dvs::Provenance{g.word(), {g.word(), g.word()}};
    dvs::save_taxonomy(t, dir / "r.json");
    ASSERT_EQ(dvs::load_taxonomy(dir / "r.json"), t);
  }
}

TEST(TaxonomySerialization, KeyOrderAndDeterminism) {
  TempDir dir;
  dvs::save_taxonomy(two_classes(), dir / "a.json");
  dvs::save_taxonomy(two_classes(), dir / "b.json");
  const std::string a = dvs::read_file(dir / "a.json");
  EXPECT_EQ(a, dvs::read_file(dir / "b.json"));
  EXPECT_LT(a.find("\"version\""), a.find("\"provenance\""));
  EXPECT_LT(a.find("\"provenance\""), a.find("\"classes\""));
  EXPECT_LT(a.find("\"name\""), a.find("\"source_labels\""));
  EXPECT_LT(a.find("\"source_labels\""), a.find("\"subcategories\""));
  EXPECT_EQ(a.back(), '\n');
}

TEST(TaxonomySerialization, SaveRejectsInvalid) {
  TempDir dir;
  Taxonomy t = two_classes();
  t.classes[0].subcategories[0].adjectives = {"one"};
  EXPECT_THROW(dvs::save_taxonomy(t, dir / "t.json"), dvs::ValidationError);
  EXPECT_FALSE(std::filesystem::exists(dir / "t.json"));
}

TEST(TaxonomySerialization, TruncatedFileIsParseError) {
  TempDir dir;
  dvs::save_taxonomy(two_classes(), dir / "t.json");
  const std::string full = dvs::read_file(dir / "t.json");
  for (std::size_t cut : {std::size_t{0}, std::size_t{1}, full.size() / 2, full.size() - 3}) {
    dvs::write_file_atomic(dir / "cut.json", full.substr(0, cut));
    EXPECT_THROW(dvs::load_taxonomy(dir / "cut.json"), dvs::ParseError) << cut;
  }
}

TEST(TaxonomySerialization, Version99IsVersionError) {
  TempDir dir;
  dvs::write_file_atomic(dir / "t.json", R"({"version": 99, "provenance": null, "classes": []})");
  EXPECT_THROW(dvs::load_taxonomy(dir / "t.json"), dvs::VersionError);
}

TEST(TaxonomySerialization, FieldPathInErrors) {
  TempDir dir;
  dvs::write_file_atomic(
      dir / "t.json",
      R"({"version": 1, "provenance": null, "classes": [{"name": "dog", "source_labels": [{"text": "x", "category": "pets"}], "subcategories": []}]})");
  try {
    dvs::load_taxonomy(dir / "t.json");
    FAIL();
  } catch (const dvs::ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("classes[0].source_labels[0].category"), std::string::npos) << e.what();
  }
  dvs::write_file_atomic(
      dir / "t.json",
      R"({"version": 1, "provenance": null, "classes": [{"name": "dog", "source_labels": [], "subcategories": [{"name": "a", "adjectives": "loud"}]}]})");
  try {
    dvs::load_taxonomy(dir / "t.json");
    FAIL();
  } catch (const dvs::ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("classes[0].subcategories[0].adjectives"), std::string::npos) << e.what();
  }
}

TEST(TaxonomySerialization, MissingFileIsIoError) {
  EXPECT_THROW(dvs::load_taxonomy("/nonexistent/dir/t.json"), dvs::IoError);
}

TEST(Taxonomy, Find) {
  const Taxonomy t = two_classes();
  ASSERT_NE(t.find("cat"), nullptr);
  EXPECT_EQ(t.find("cat")->subcategories.size(), 3u);
  EXPECT_EQ(t.find("cow"), nullptr);
}

}  // namespace
