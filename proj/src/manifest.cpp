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

#include "dvs/manifest.hpp"

#include <set>
#include <sstream>

#include "dvs/error.hpp"
#include "dvs/io.hpp"
#include "dvs/json_util.hpp"
#include "dvs/taxonomy.hpp"
#include "json.hpp"

namespace dvs {

using ojson = nlohmann::ordered_json;
using nlohmann::json;

std::size_t DatasetManifest::retained_clip_count() const noexcept {
  std::size_t n = 0;
  for (const auto& c : classes) {
    for (const auto& s : c.subcategories) n += s.clip_ids.size();
  }
  return n;
}

std::size_t DatasetManifest::dropped_clip_count() const noexcept {
  std::size_t n = 0;
  for (const auto& d : dropped_subcategories) n += d.clip_count();
  return n;
}

std::size_t DatasetManifest::total_clip_count() const noexcept {
  return retained_clip_count() + dropped_clip_count() + unmatched_clips.size();
}

ManifestSummary summarize(const DatasetManifest& m) {
  ManifestSummary s;
  s.class_count = m.classes.size();
  std::size_t subs = 0;
  for (const auto& c : m.classes) subs += c.subcategories.size();
  s.mean_subcategories =
      s.class_count == 0 ? 0.0 : round4(static_cast<double>(subs) / static_cast<double>(s.class_count));
  s.total_clips = m.retained_clip_count();
  s.dropped_count = m.dropped_subcategories.size();
  s.dropped_clips = m.dropped_clip_count();
  s.unmatched_count = m.unmatched_clips.size();
  return s;
}

std::vector<std::string> validate_manifest(const DatasetManifest& m, std::size_t min_clips) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  auto note = [&](const std::string& id) {
    if (!seen.insert(id).second) out.push_back("clip listed more than once: " + id);
  };
  for (const auto& c : m.classes) {
    for (const auto& s : c.subcategories) {
      if (s.clip_ids.size() < min_clips) {
        out.push_back("retained subcategory below min_clips: " + c.class_name + "/" + s.name + " has " +
                      std::to_string(s.clip_ids.size()));
      }
      for (const auto& id : s.clip_ids) note(id);
    }
  }
  for (const auto& d : m.dropped_subcategories) {
    for (const auto& id : d.clip_ids) note(id);
  }
  for (const auto& id : m.unmatched_clips) note(id);
  return out;
}

std::string manifest_to_jsonl(const DatasetManifest& m) {
  std::string out;
  for (const auto& c : m.classes) {
    ojson jc;
    jc["class_name"] = c.class_name;
    ojson subs = ojson::array();
    for (const auto& s : c.subcategories) {
      ojson js;
      js["name"] = s.name;
      js["clip_count"] = s.clip_ids.size();
      js["clip_ids"] = s.clip_ids;
      js["representative_frame"] = s.representative_frame;
      js["representative_similarity"] = s.representative_similarity;
      subs.push_back(std::move(js));
    }
    jc["subcategories"] = std::move(subs);
    out += jc.dump();
    out += '\n';
  }
  const ManifestSummary s = summarize(m);
  ojson summary;
  summary["class_count"] = s.class_count;
  summary["mean_subcategories"] = s.mean_subcategories;
  summary["total_clips"] = s.total_clips;
  summary["dropped_count"] = s.dropped_count;
  summary["unmatched_count"] = s.unmatched_count;
  summary["dropped_clips"] = s.dropped_clips;
  summary["taxonomy_version"] = m.taxonomy_version;
  ojson dropped = ojson::array();
  for (const auto& d : m.dropped_subcategories) {
    ojson jd;
    jd["class"] = d.class_name;
    jd["name"] = d.name;
    jd["clip_count"] = d.clip_count();
    jd["reason"] = d.reason;
    jd["clip_ids"] = d.clip_ids;
    dropped.push_back(std::move(jd));
  }
  summary["dropped_subcategories"] = std::move(dropped);
  summary["unmatched_clips"] = m.unmatched_clips;
  out += summary.dump();
  out += '\n';
  return out;
}

DatasetManifest manifest_from_jsonl(std::string_view text, std::string_view what) {
  namespace ju = json_util;
  std::vector<std::pair<std::size_t, std::string>> lines;
  {
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
      ++n;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      lines.emplace_back(n, line);
    }
  }
  if (lines.empty()) throw ParseError(std::string(what) + ": empty manifest (no summary line)");

  auto at_line = [&](std::size_t lineno) { return std::string(what) + ":" + std::to_string(lineno); };
  DatasetManifest m;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& [lineno, line] = lines[i];
    const json j = ju::parse(line, at_line(lineno));
    const bool last = i + 1 == lines.size();
    try {
      if (!last) {
        ManifestClass c;
        c.class_name = ju::require_string(j, "class_name", "");
        const auto& subs = ju::require_array(j, "subcategories", "");
        for (std::size_t k = 0; k < subs.size(); ++k) {
          const std::string p = ju::index_path("subcategories", k);
          ManifestSubcategory s;
          s.name = ju::require_string(subs[k], "name", p);
          s.clip_ids = ju::require_string_array(subs[k], "clip_ids", p);
          if (static_cast<std::size_t>(ju::require_int(subs[k], "clip_count", p)) != s.clip_ids.size()) {
            throw ParseError(ju::join_path(p, "clip_count") + ": disagrees with clip_ids");
          }
          s.representative_frame = ju::require_string(subs[k], "representative_frame", p);
          s.representative_similarity = ju::require_number(subs[k], "representative_similarity", p);
          c.subcategories.push_back(std::move(s));
        }
        m.classes.push_back(std::move(c));
        continue;
      }
      if (!j.contains("class_count")) {
        throw ParseError("last line must be the summary record");
      }
      m.taxonomy_version = static_cast<int>(ju::require_int(j, "taxonomy_version", ""));
      const auto& dropped = ju::require_array(j, "dropped_subcategories", "");
      for (std::size_t k = 0; k < dropped.size(); ++k) {
        const std::string p = ju::index_path("dropped_subcategories", k);
        DroppedSubcategory d;
        d.class_name = ju::require_string(dropped[k], "class", p);
        d.name = ju::require_string(dropped[k], "name", p);
        d.reason = ju::require_string(dropped[k], "reason", p);
        d.clip_ids = ju::require_string_array(dropped[k], "clip_ids", p);
        if (static_cast<std::size_t>(ju::require_int(dropped[k], "clip_count", p)) != d.clip_ids.size()) {
          throw ParseError(ju::join_path(p, "clip_count") + ": disagrees with clip_ids");
        }
        m.dropped_subcategories.push_back(std::move(d));
      }
      m.unmatched_clips = ju::require_string_array(j, "unmatched_clips", "");
      const ManifestSummary s = summarize(m);
      auto check = [&](std::string_view key, std::size_t expected) {
        if (static_cast<std::size_t>(ju::require_int(j, key, "")) != expected) {
          throw ParseError(std::string(key) + ": summary disagrees with manifest body");
        }
      };
      check("class_count", s.class_count);
      check("total_clips", s.total_clips);
      check("dropped_count", s.dropped_count);
      check("unmatched_count", s.unmatched_count);
    } catch (const ParseError& e) {
      if (std::string_view(e.what()).starts_with(at_line(lineno))) throw;
      throw ParseError(at_line(lineno) + ": " + e.what());
    }
  }
  return m;
}

void save_manifest(const DatasetManifest& m, const std::filesystem::path& path) {
  write_file_atomic(path, manifest_to_jsonl(m));
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  return manifest_from_jsonl(read_file(path), path.string());
}

}  // namespace dvs
