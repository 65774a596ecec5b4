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

#include "dvs/taxonomy_builder.hpp"

#include <algorithm>
#include <future>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

#include "builtin_prompts.hpp"
#include "dvs/error.hpp"
#include "dvs/io.hpp"

namespace dvs {

using nlohmann::json;

namespace {

std::vector<std::string> required_placeholders(PromptStage stage) {
  if (stage == PromptStage::kCluster) return {"{category}", "{labels}"};
  return {"{class_name}", "{labels}"};
}

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

std::string bullet_list(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& it : items) {
    if (!out.empty()) out += '\n';
    out += "- " + it;
  }
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<ChatMessage> render(const PromptTemplate& tmpl,
                                const std::vector<std::pair<std::string_view, std::string>>& values) {
  if (auto missing = tmpl.missing_placeholders(); !missing.empty()) {
    throw ValidationError("prompt template lacks placeholder " + missing.front());
  }
  std::string text = tmpl.template_text;
  for (const auto& [key, value] : values) replace_all(text, key, value);
  const auto sep = text.find(kUserSeparator);
  if (sep == std::string::npos) {
    return {{"user", trim(text)}};
  }
  return {{"system", trim(std::string_view(text).substr(0, sep))},
          {"user", trim(std::string_view(text).substr(sep + kUserSeparator.size()))}};
}

// End of the balanced object starting at `start`, honoring JSON strings.
std::optional<std::size_t> balanced_end(std::string_view s, std::size_t start) {
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = start; i < s.size(); ++i) {
    const char c = s[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return i;
    }
  }
  return std::nullopt;
}

bool nonempty_string(const json& j) { return j.is_string() && !j.get_ref<const std::string&>().empty(); }

}  // namespace

PromptTemplate PromptTemplate::builtin(PromptStage stage) {
  return {stage, stage == PromptStage::kCluster ? builtin_prompts::kCluster : builtin_prompts::kSubcategorize};
}

PromptTemplate PromptTemplate::load(PromptStage stage, const std::filesystem::path& path) {
  PromptTemplate t{stage, read_file(path)};
  if (auto missing = t.missing_placeholders(); !missing.empty()) {
    throw ValidationError(path.string() + ": prompt template lacks placeholder " + missing.front());
  }
  return t;
}

std::vector<std::string> PromptTemplate::missing_placeholders() const {
  std::vector<std::string> out;
  for (auto& p : required_placeholders(stage)) {
    if (template_text.find(p) == std::string::npos) out.push_back(p);
  }
  return out;
}

std::vector<ChatMessage> build_cluster_prompt(std::string_view category, const std::vector<std::string>& labels,
                                              const PromptTemplate& tmpl) {
  if (!parse_category(category)) {
    throw ValidationError("unknown category: " + std::string(category));
  }
  if (labels.empty()) {
    throw ValidationError("cannot build a cluster prompt without labels");
  }
  return render(tmpl, {{"{category}", std::string(category)}, {"{labels}", bullet_list(labels)}});
}

std::vector<ChatMessage> build_subcategory_prompt(const SoundClass& sound_class, const PromptTemplate& tmpl) {
  if (sound_class.name.empty()) {
    throw ValidationError("cannot build a subcategory prompt for a class without a name");
  }
  if (sound_class.source_labels.empty()) {
    throw ValidationError("class " + sound_class.name + " has no source labels");
  }
  std::vector<std::string> labels;
  for (const auto& l : sound_class.source_labels) labels.push_back(l.text);
  return render(tmpl, {{"{class_name}", sound_class.name}, {"{labels}", bullet_list(labels)}});
}

std::optional<json> extract_first_json_object(std::string_view raw) {
  for (std::size_t pos = raw.find('{'); pos != std::string_view::npos; pos = raw.find('{', pos + 1)) {
    auto end = balanced_end(raw, pos);
    if (!end) continue;
    auto candidate = raw.substr(pos, *end - pos + 1);
    json j = json::parse(candidate.begin(), candidate.end(), nullptr, false);
    if (!j.is_discarded() && j.is_object()) return j;
  }
  return std::nullopt;
}

ClusterResult parse_cluster_response(std::string_view raw, const std::vector<std::string>& input_labels) {
  auto doc = extract_first_json_object(raw);
  if (!doc) throw ParseError("cluster response contains no JSON object");
  const std::set<std::string> inputs(input_labels.begin(), input_labels.end());

  ClusterResult result;
  if (auto c = doc->find("category"); c != doc->end() && c->is_string()) {
    result.category = c->get<std::string>();
  }
  auto classes = doc->find("classes");
  if (classes == doc->end() || !classes->is_array()) {
    throw ParseError("cluster response: 'classes' must be an array");
  }

  std::set<std::string> assigned;
  std::set<std::string> class_names;
  for (std::size_t i = 0; i < classes->size(); ++i) {
    const json& jc = (*classes)[i];
    const std::string where = "classes[" + std::to_string(i) + "]";
    if (!jc.is_object()) throw ParseError("cluster response: " + where + " is not an object");
    auto name = jc.find("class_name");
    if (name == jc.end() || !nonempty_string(*name)) {
      throw ParseError("cluster response: " + where + ".class_name must be a non-empty string");
    }
    auto members = jc.find("labels");
    if (members == jc.end() || !members->is_array() || members->empty()) {
      throw ParseError("cluster response: " + where + ".labels must be a non-empty array");
    }
    Cluster cluster{name->get<std::string>(), {}};
    if (!class_names.insert(cluster.class_name).second) {
      throw ParseError("cluster response: duplicate class name " + cluster.class_name);
    }
    for (const auto& m : *members) {
      if (!m.is_string()) throw ParseError("cluster response: " + where + ".labels holds a non-string");
      const std::string label = m.get<std::string>();
      if (!inputs.count(label)) {
        throw HallucinationError("cluster response names a label not in the input: " + label);
      }
      if (!assigned.insert(label).second) {
        throw ParseError("cluster response assigns label to more than one class: " + label);
      }
      cluster.member_labels.push_back(label);
    }
    result.clusters.push_back(std::move(cluster));
  }

  if (auto d = doc->find("discarded"); d != doc->end() && !d->is_null()) {
    if (!d->is_array()) throw ParseError("cluster response: 'discarded' must be an array");
    for (const auto& m : *d) {
      if (!m.is_string()) throw ParseError("cluster response: 'discarded' holds a non-string");
      const std::string label = m.get<std::string>();
      if (!inputs.count(label)) {
        throw HallucinationError("cluster response discards a label not in the input: " + label);
      }
      if (assigned.count(label)) {
        throw ParseError("cluster response both keeps and discards label: " + label);
      }
    }
  }
  // Keep input order for the discard list; unmentioned labels count as discarded.
  for (const auto& label : input_labels) {
    if (!assigned.count(label) &&
        std::find(result.discarded_labels.begin(), result.discarded_labels.end(), label) ==
            result.discarded_labels.end()) {
      result.discarded_labels.push_back(label);
    }
  }
  return result;
}

SubcategoryParse parse_subcategory_response(std::string_view raw) {
  auto doc = extract_first_json_object(raw);
  if (!doc) throw ParseError("subcategory response contains no JSON object");
  auto subs = doc->find("subcategories");
  if (subs == doc->end() || !subs->is_array()) {
    throw ParseError("subcategory response: 'subcategories' must be an array");
  }
  SubcategoryParse out;
  std::set<std::string> names;
  for (std::size_t i = 0; i < subs->size(); ++i) {
    const json& js = (*subs)[i];
    const std::string where = "subcategories[" + std::to_string(i) + "]";
    if (!js.is_object()) {
      out.violations.push_back(where + ": not an object");
      continue;
    }
    auto name = js.find("name");
    if (name == js.end() || !nonempty_string(*name)) {
      out.violations.push_back(where + ": missing or empty name");
      continue;
    }
    Subcategory s;
    s.name = name->get<std::string>();
    const std::string label = where + " (" + s.name + ")";
    auto adjs = js.find("adjectives");
    if (adjs == js.end() || !adjs->is_array()) {
      out.violations.push_back(label + ": adjectives must be an array");
      continue;
    }
    bool ok = true;
    for (const auto& a : *adjs) {
      if (!nonempty_string(a)) {
        out.violations.push_back(label + ": adjectives must be non-empty strings");
        ok = false;
        break;
      }
      s.adjectives.push_back(a.get<std::string>());
    }
    if (!ok) continue;
    if (s.adjectives.size() < kMinAdjectives || s.adjectives.size() > kMaxAdjectives) {
      out.violations.push_back(label + ": adjective count out of range [2,4] (" +
                               std::to_string(s.adjectives.size()) + ")");
      continue;
    }
    if (auto d = js.find("description"); d != js.end() && d->is_string()) {
      s.description = d->get<std::string>();
    }
    if (!names.insert(s.name).second) {
      out.violations.push_back(label + ": duplicate subcategory name");
      continue;
    }
    out.subcategories.push_back(std::move(s));
  }
  return out;
}

namespace {

struct CategoryOutcome {
  std::vector<SoundClass> classes;
  std::vector<std::string> hashes;
  std::vector<std::string> notes;
};

CategoryOutcome process_category(Category category, const std::vector<std::string>& labels,
                                 ChatBackend& backend, const PipelineOptions& options) {
  CategoryOutcome out;
  const std::string cat(category_name(category));
  auto ask = [&](std::vector<ChatMessage> messages) {
    ChatRequest req{options.model, std::move(messages), 0.0, options.seed};
    ChatReply reply = backend.complete(req);
    out.hashes.push_back(reply.request_hash);
    return reply.content;
  };

  const ClusterResult clusters =
      parse_cluster_response(ask(build_cluster_prompt(cat, labels, options.cluster_template)), labels);
  for (const auto& d : clusters.discarded_labels) {
    out.notes.push_back(cat + ": discarded label '" + d + "'");
  }
  for (const auto& cluster : clusters.clusters) {
    SoundClass sc;
    sc.name = cluster.class_name;
    for (const auto& m : cluster.member_labels) sc.source_labels.push_back({m, category});
    SubcategoryParse subs = parse_subcategory_response(ask(build_subcategory_prompt(sc, options.subcategory_template)));
    for (const auto& v : subs.violations) {
      out.notes.push_back(cat + "/" + sc.name + ": rejected " + v);
    }
    if (subs.subcategories.size() < 2) {
      out.notes.push_back(cat + "/" + sc.name + ": dropped class with " +
                          std::to_string(subs.subcategories.size()) + " valid subcategories");
      continue;
    }
    sc.subcategories = std::move(subs.subcategories);
    out.classes.push_back(std::move(sc));
  }
  return out;
}

}  // namespace

PipelineResult run_taxonomy_pipeline(const std::vector<SourceLabel>& labels, ChatBackend& backend,
                                     const PipelineOptions& options) {
  std::map<Category, std::vector<std::string>> by_category;
  std::set<std::string> seen;
  for (const auto& l : labels) {
    if (l.text.empty()) throw ValidationError("empty source label");
    if (!seen.insert(l.text).second) throw ValidationError("duplicate source label: " + l.text);
    by_category[l.category].push_back(l.text);
  }
  std::vector<Category> order;
  for (Category c : kAllCategories) {
    if (by_category.count(c)) order.push_back(c);
  }

  std::vector<CategoryOutcome> outcomes(order.size());
  const std::size_t width = std::max<std::size_t>(1, options.parallelism);
  for (std::size_t wave = 0; wave < order.size(); wave += width) {
    const std::size_t end = std::min(order.size(), wave + width);
    if (width == 1) {
      outcomes[wave] = process_category(order[wave], by_category[order[wave]], backend, options);
      continue;
    }
    std::vector<std::future<CategoryOutcome>> pending;
    for (std::size_t i = wave; i < end; ++i) {
      pending.push_back(std::async(std::launch::async, [&, i] {
        return process_category(order[i], by_category.at(order[i]), backend, options);
      }));
    }
    for (std::size_t i = wave; i < end; ++i) outcomes[i] = pending[i - wave].get();
  }

  PipelineResult result;
  Provenance provenance{options.model, {}};
  std::set<std::string> class_names;
  for (auto& o : outcomes) {
    for (auto& h : o.hashes) provenance.transcript_hashes.push_back(std::move(h));
    for (auto& n : o.notes) result.notes.push_back(std::move(n));
    for (auto& c : o.classes) {
      if (!class_names.insert(c.name).second) {
        result.notes.push_back("dropped duplicate class name '" + c.name + "' from a later category");
        continue;
      }
      result.taxonomy.classes.push_back(std::move(c));
    }
  }
  result.taxonomy.provenance = std::move(provenance);
  return result;
}

std::vector<SourceLabel> read_label_file(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::vector<SourceLabel> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto tab = t.find('\t');
    if (tab == std::string::npos) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": expected 'category<TAB>label'");
    }
    const std::string cat = trim(std::string_view(t).substr(0, tab));
    const std::string text = trim(std::string_view(t).substr(tab + 1));
    auto c = parse_category(cat);
    if (!c) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": unknown category '" + cat + "'");
    }
    if (text.empty()) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": empty label");
    }
    out.push_back({text, *c});
  }
  return out;
}

}  // namespace dvs
