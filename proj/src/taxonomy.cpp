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

#include <cmath>
#include <set>
#include <unordered_map>

#include "dvs/error.hpp"
#include "dvs/io.hpp"
#include "dvs/json_util.hpp"

namespace dvs {

namespace {

constexpr std::array<std::string_view, 9> kCategoryNames = {
    "animals", "home", "music", "nature", "people", "sports", "tools", "vehicle", "others"};

std::string join_lines(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += "; ";
    out += s;
  }
  return out;
}

}  // namespace

std::string_view category_name(Category c) noexcept {
  return kCategoryNames[static_cast<std::size_t>(c)];
}

std::optional<Category> parse_category(std::string_view name) noexcept {
  for (std::size_t i = 0; i < kCategoryNames.size(); ++i) {
    if (kCategoryNames[i] == name) return static_cast<Category>(i);
  }
  return std::nullopt;
}

const SoundClass* Taxonomy::find(std::string_view class_name) const noexcept {
  for (const auto& c : classes) {
    if (c.name == class_name) return &c;
  }
  return nullptr;
}

std::vector<std::string> validate_taxonomy(const Taxonomy& t) {
  std::vector<std::string> out;
  if (t.version < 1) {
    out.push_back("version must be >= 1: " + std::to_string(t.version));
  }
  std::set<std::string> class_names;
  std::unordered_map<std::string, std::string> label_owner;
  for (std::size_t ci = 0; ci < t.classes.size(); ++ci) {
    const SoundClass& c = t.classes[ci];
    const std::string cname = c.name.empty() ? "classes[" + std::to_string(ci) + "]" : c.name;
    if (c.name.empty()) {
      out.push_back("empty class name: " + cname);
    } else if (!class_names.insert(c.name).second) {
      out.push_back("duplicate class name: " + c.name);
    }
    if (c.source_labels.empty()) {
      out.push_back("no source labels: " + cname);
    }
    for (const auto& label : c.source_labels) {
      if (label.text.empty()) {
        out.push_back("empty source label: " + cname);
        continue;
      }
      auto [it, inserted] = label_owner.emplace(label.text, cname);
      if (!inserted) {
        out.push_back("source label in multiple classes: " + label.text);
      }
    }
    std::set<std::string> sub_names;
    for (const auto& s : c.subcategories) {
      const std::string where = cname + "/" + s.name;
      if (s.name.empty()) {
        out.push_back("empty subcategory name: " + cname);
      } else if (!sub_names.insert(s.name).second) {
        out.push_back("duplicate subcategory name: " + where);
      }
      if (s.adjectives.size() < kMinAdjectives || s.adjectives.size() > kMaxAdjectives) {
        out.push_back("adjective count out of range [2,4]: " + where + " has " +
                      std::to_string(s.adjectives.size()));
      }
      for (const auto& adj : s.adjectives) {
        if (adj.empty()) {
          out.push_back("empty adjective: " + where);
          break;
        }
      }
    }
  }
  return out;
}

std::vector<std::string> taxonomy_warnings(const Taxonomy& t) {
  std::vector<std::string> out;
  for (const auto& c : t.classes) {
    if (c.subcategories.empty()) {
      out.push_back("no subcategories: " + c.name);
    } else if (c.subcategories.size() == 1) {
      out.push_back("single subcategory: " + c.name);
    }
  }
  return out;
}

double round4(double x) noexcept { return std::round(x * 10000.0) / 10000.0; }

TaxonomyStats taxonomy_stats(const Taxonomy& t) {
  if (t.classes.empty()) {
    throw ValidationError("no classes");
  }
  TaxonomyStats stats;
  stats.class_count = t.classes.size();
  for (const auto& c : t.classes) {
    stats.total_subcategories += c.subcategories.size();
    stats.subcategory_histogram[c.subcategories.size()].push_back(c.name);
  }
  stats.mean_subcategories = round4(static_cast<double>(stats.total_subcategories) /
                                    static_cast<double>(stats.class_count));
  return stats;
}

nlohmann::ordered_json taxonomy_to_json(const Taxonomy& t) {
  using oj = nlohmann::ordered_json;
  oj doc;
  doc["version"] = t.version;
  if (t.provenance) {
    oj prov;
    prov["model_id"] = t.provenance->model_id;
    prov["transcript_hashes"] = t.provenance->transcript_hashes;
    doc["provenance"] = std::move(prov);
  } else {
    doc["provenance"] = nullptr;
  }
  oj classes = oj::array();
  for (const auto& c : t.classes) {
    oj jc;
    jc["name"] = c.name;
    oj labels = oj::array();
    for (const auto& l : c.source_labels) {
      oj jl;
      jl["text"] = l.text;
      jl["category"] = category_name(l.category);
      labels.push_back(std::move(jl));
    }
    jc["source_labels"] = std::move(labels);
    oj subs = oj::array();
    for (const auto& s : c.subcategories) {
      oj js;
      js["name"] = s.name;
      js["adjectives"] = s.adjectives;
      if (s.description) {
        js["description"] = *s.description;
      } else {
        js["description"] = nullptr;
      }
      subs.push_back(std::move(js));
    }
    jc["subcategories"] = std::move(subs);
    classes.push_back(std::move(jc));
  }
  doc["classes"] = std::move(classes);
  return doc;
}

Taxonomy taxonomy_from_json(const nlohmann::json& j) {
  namespace ju = json_util;
  ju::expect_object(j, "");
  Taxonomy t;
  const auto version = ju::require_int(j, "version", "");
  if (version != kTaxonomySchemaVersion) {
    throw VersionError("version: unsupported taxonomy version " + std::to_string(version) +
                       " (supported: " + std::to_string(kTaxonomySchemaVersion) + ")");
  }
  t.version = static_cast<int>(version);

  if (auto it = j.find("provenance"); it != j.end() && !it->is_null()) {
    ju::expect_object(*it, "provenance");
    Provenance p;
    p.model_id = ju::require_string(*it, "model_id", "provenance");
    p.transcript_hashes = ju::require_string_array(*it, "transcript_hashes", "provenance");
    t.provenance = std::move(p);
  }

  const auto& classes = ju::require_array(j, "classes", "");
  for (std::size_t ci = 0; ci < classes.size(); ++ci) {
    const std::string cp = ju::index_path("classes", ci);
    const auto& jc = classes[ci];
    ju::expect_object(jc, cp);
    SoundClass c;
    c.name = ju::require_string(jc, "name", cp);
    const auto& labels = ju::require_array(jc, "source_labels", cp);
    for (std::size_t li = 0; li < labels.size(); ++li) {
      const std::string lp = ju::index_path(ju::join_path(cp, "source_labels"), li);
      ju::expect_object(labels[li], lp);
      SourceLabel l;
      l.text = ju::require_string(labels[li], "text", lp);
      const std::string cat = ju::require_string(labels[li], "category", lp);
      auto parsed = parse_category(cat);
      if (!parsed) {
        throw ParseError(ju::join_path(lp, "category") + ": unknown category '" + cat + "'");
      }
      l.category = *parsed;
      c.source_labels.push_back(std::move(l));
    }
    const auto& subs = ju::require_array(jc, "subcategories", cp);
    for (std::size_t si = 0; si < subs.size(); ++si) {
      const std::string sp = ju::index_path(ju::join_path(cp, "subcategories"), si);
      ju::expect_object(subs[si], sp);
      Subcategory s;
      s.name = ju::require_string(subs[si], "name", sp);
      s.adjectives = ju::require_string_array(subs[si], "adjectives", sp);
      if (auto d = subs[si].find("description"); d != subs[si].end() && !d->is_null()) {
        if (!d->is_string()) {
          throw ParseError(ju::join_path(sp, "description") + ": expected string or null");
        }
        s.description = d->get<std::string>();
      }
      c.subcategories.push_back(std::move(s));
    }
    t.classes.push_back(std::move(c));
  }
  return t;
}

void save_taxonomy(const Taxonomy& t, const std::filesystem::path& path) {
  if (auto v = validate_taxonomy(t); !v.empty()) {
    throw ValidationError("refusing to save invalid taxonomy: " + join_lines(v));
  }
  write_file_atomic(path, taxonomy_to_json(t).dump(2) + "\n");
}

Taxonomy load_taxonomy(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  const auto doc = json_util::parse(text, path.string());
  try {
    return taxonomy_from_json(doc);
  } catch (const VersionError& e) {
    throw VersionError(path.string() + ": " + e.what());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace dvs
