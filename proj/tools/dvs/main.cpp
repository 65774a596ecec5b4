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

// dvs: command-line front end for taxonomy construction, cross-modal
// matching, conditioning export and objective metrics.
//
// Exit codes: 0 success, 1 validation failure, 2 I/O or parse error,
// 3 network failure or replay miss.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dvs/chat_client.hpp"
#include "dvs/config.hpp"
#include "dvs/embedding_io.hpp"
#include "dvs/error.hpp"
#include "dvs/fusion.hpp"
#include "dvs/io.hpp"
#include "dvs/json_util.hpp"
#include "dvs/manifest.hpp"
#include "dvs/matcher.hpp"
#include "dvs/metrics.hpp"
#include "dvs/provider_client.hpp"
#include "dvs/taxonomy.hpp"
#include "dvs/taxonomy_builder.hpp"

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

struct GlobalArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  bool print_config = false;
};

struct TaxonomyBuildArgs {
  std::string labels;
  std::string out;
  std::string replay;
  std::string record;
  std::string prompt_dir;
  std::string base_url;
  std::string model;
  std::size_t parallelism = 0;
};

struct MatchArgs {
  std::string taxonomy, clips, audio, frames, text, text_augmented, out, records;
  std::size_t min_clips = 0;
  double softmax_scale = 0;
  std::string frame_agg;
  std::size_t frames_per_clip = 0;
  bool keep_singleton_classes = false;
  std::size_t threads = 0;
};

struct MetricsArgs {
  std::string real, gen, emb, manifest, clips, out;
  std::vector<double> a, b;
};

struct FuseArgs {
  std::string manifest, mode, text, image, out, table_out;
  std::uint32_t label_dim = 0;
};

struct EmbedArgs {
  std::string input, modality, out, provider, items, taxonomy, text_kind = "plain";
  std::size_t batch_size = 64;
  std::size_t parallelism = 1;
};

void emit_report(const ojson& report, const std::string& out_path) {
  const std::string text = report.dump(2) + "\n";
  std::cout << text;
  if (!out_path.empty()) dvs::write_file_atomic(out_path, text);
}

std::string report_path(const dvs::PipelineConfig& cfg, const std::string& explicit_out, const std::string& name) {
  if (!explicit_out.empty()) return explicit_out;
  if (cfg.paths.reports.empty()) return {};
  fs::create_directories(cfg.paths.reports);
  return (fs::path(cfg.paths.reports) / (name + ".json")).string();
}

std::string or_default(const std::string& value, const std::string& fallback) {
  return value.empty() ? fallback : value;
}

std::string embeddings_file(const dvs::PipelineConfig& cfg, const std::string& name) {
  return (fs::path(cfg.paths.embeddings) / name).string();
}

// ---- taxonomy -------------------------------------------------------------

int taxonomy_build(const dvs::PipelineConfig& cfg, const TaxonomyBuildArgs& args) {
  const auto labels = dvs::read_label_file(args.labels);
  dvs::PipelineOptions options;
  options.model = cfg.llm.model;
  options.parallelism = cfg.llm.parallelism;
  options.seed = cfg.llm.seed;
  if (!args.prompt_dir.empty()) {
    const fs::path dir(args.prompt_dir);
    options.cluster_template = dvs::PromptTemplate::load(dvs::PromptStage::kCluster, dir / "cluster.txt");
    options.subcategory_template =
        dvs::PromptTemplate::load(dvs::PromptStage::kSubcategorize, dir / "subcategorize.txt");
  }

  const std::string replay = or_default(args.replay, cfg.llm.replay_dir.value_or(""));
  std::unique_ptr<dvs::ChatBackend> live;
  std::unique_ptr<dvs::ChatBackend> backend;
  if (!replay.empty()) {
    if (!fs::is_directory(replay)) throw dvs::IoError("replay directory not found: " + replay);
    backend = std::make_unique<dvs::ReplayChatClient>(dvs::TranscriptStore(replay));
  } else {
    dvs::HttpChatConfig http;
    http.base_url = cfg.llm.base_url;
    http.api_key = dvs::api_key_from_env();
    live = std::make_unique<dvs::HttpChatClient>(http);
    if (!args.record.empty()) {
      backend = std::make_unique<dvs::RecordingChatClient>(*live, dvs::TranscriptStore(args.record));
    } else {
      backend = std::move(live);
    }
  }

  const auto result = dvs::run_taxonomy_pipeline(labels, *backend, options);
  for (const auto& note : result.notes) std::cerr << "note: " << note << "\n";
  const std::string out = or_default(args.out, cfg.paths.taxonomy);
  dvs::save_taxonomy(result.taxonomy, out);

  ojson report;
  report["output"] = out;
  report["class_count"] = result.taxonomy.classes.size();
  report["transcripts"] = result.taxonomy.provenance ? result.taxonomy.provenance->transcript_hashes.size() : 0;
  report["notes"] = result.notes;
  emit_report(report, "");
  return 0;
}

int taxonomy_validate(const std::string& path) {
  const auto t = dvs::load_taxonomy(path);
  const auto violations = dvs::validate_taxonomy(t);
  for (const auto& w : dvs::taxonomy_warnings(t)) std::cerr << "warning: " << w << "\n";
  for (const auto& v : violations) std::cerr << "violation: " << v << "\n";
  ojson report;
  report["path"] = path;
  report["valid"] = violations.empty();
  report["violations"] = violations;
  emit_report(report, "");
  return violations.empty() ? 0 : static_cast<int>(dvs::ExitCode::kValidation);
}

int taxonomy_stats(const std::string& path) {
  const auto t = dvs::load_taxonomy(path);
  const auto s = dvs::taxonomy_stats(t);
  ojson report;
  report["path"] = path;
  report["class_count"] = s.class_count;
  report["total_subcategories"] = s.total_subcategories;
  report["mean_subcategories"] = s.mean_subcategories;
  ojson hist = ojson::object();
  for (const auto& [count, names] : s.subcategory_histogram) hist[std::to_string(count)] = names;
  report["subcategory_histogram"] = std::move(hist);
  emit_report(report, "");
  return 0;
}

// ---- match ----------------------------------------------------------------

int match_run(const dvs::PipelineConfig& cfg, const MatchArgs& args) {
  const std::string tax_path = or_default(args.taxonomy, cfg.paths.taxonomy);
  const auto taxonomy = dvs::load_taxonomy(tax_path);
  if (auto v = dvs::validate_taxonomy(taxonomy); !v.empty()) {
    throw dvs::ValidationError(tax_path + ": invalid taxonomy: " + v.front());
  }
  const auto clips = dvs::read_clip_classes(or_default(args.clips, embeddings_file(cfg, "clips.tsv")));
  const auto audio = dvs::read_embeddings(or_default(args.audio, embeddings_file(cfg, "audio.emb")),
                                          dvs::Modality::kAudio);
  const auto frames = dvs::read_embeddings(or_default(args.frames, embeddings_file(cfg, "frames.emb")),
                                           dvs::Modality::kImage);
  const auto text = dvs::read_embeddings(or_default(args.text, embeddings_file(cfg, "text.emb")),
                                         dvs::Modality::kText);
  const auto text_aug = dvs::read_embeddings(
      or_default(args.text_augmented, embeddings_file(cfg, "text_augmented.emb")), dvs::Modality::kText);

  dvs::BuildOptions options;
  options.filter.min_clips = cfg.matching.min_clips;
  options.filter.keep_singleton_classes = cfg.matching.keep_singleton_classes;
  options.match.scale = cfg.matching.softmax_scale;
  options.match.aggregation = cfg.matching.frame_agg;
  options.frames_per_clip = cfg.matching.frames_per_clip;
  options.seed = cfg.matching.seed;
  options.threads = cfg.matching.threads;

  const auto result = dvs::build_dataset(taxonomy, audio, frames, text, text_aug, clips, options);
  const std::string out = or_default(args.out, cfg.paths.manifest);
  dvs::save_manifest(result.manifest, out);

  if (!args.records.empty()) {
    std::string lines;
    for (const auto& r : result.records) {
      ojson j;
      j["clip_id"] = r.clip_id;
      j["image_choice"] = r.image_choice;
      j["image_probabilities"] = r.image_probabilities;
      j["audio_choice"] = r.audio_choice;
      j["agreed"] = r.agreed;
      j["assigned"] = r.assigned ? ojson(*r.assigned) : ojson(nullptr);
      lines += j.dump() + "\n";
    }
    dvs::write_file_atomic(args.records, lines);
  }

  const auto s = dvs::summarize(result.manifest);
  ojson report;
  report["manifest"] = out;
  report["input_clips"] = result.records.size();
  report["class_count"] = s.class_count;
  report["mean_subcategories"] = s.mean_subcategories;
  report["total_clips"] = s.total_clips;
  report["dropped_count"] = s.dropped_count;
  report["dropped_clips"] = s.dropped_clips;
  report["unmatched_count"] = s.unmatched_count;
  emit_report(report, "");
  return 0;
}

// ---- metrics --------------------------------------------------------------

ojson set_info(const std::string& path, const dvs::EmbeddingSet& set) {
  ojson j;
  j["path"] = path;
  j["n"] = set.size();
  j["d"] = set.dim();
  return j;
}

int metrics_fad(const dvs::PipelineConfig& cfg, const MetricsArgs& args) {
  const auto real = dvs::read_embeddings(args.real);
  const auto gen = dvs::read_embeddings(args.gen);
  if (real.dim() != gen.dim()) {
    throw dvs::DimensionError("real and generated embeddings differ in dim: " + std::to_string(real.dim()) +
                              " vs " + std::to_string(gen.dim()));
  }
  const auto fd = dvs::frechet_distance(dvs::fit_gaussian(real), dvs::fit_gaussian(gen));
  ojson report;
  report["fad"]["value"] = fd.distance;
  report["fad"]["regularization_applied"] = fd.regularization_applied;
  report["fad"]["real"] = set_info(args.real, real);
  report["fad"]["gen"] = set_info(args.gen, gen);
  emit_report(report, report_path(cfg, args.out, "fad"));
  return 0;
}

int metrics_msd(const dvs::PipelineConfig& cfg, const MetricsArgs& args) {
  if (args.manifest.empty() == args.clips.empty()) {
    throw dvs::ValidationError("metrics msd needs exactly one of --manifest or --clips");
  }
  const auto emb = dvs::read_embeddings(args.emb);
  std::map<std::string, std::vector<std::string>> members;
  if (!args.manifest.empty()) {
    const auto m = dvs::load_manifest(args.manifest);
    for (const auto& c : m.classes) {
      auto& ids = members[c.class_name];
      for (const auto& s : c.subcategories) ids.insert(ids.end(), s.clip_ids.begin(), s.clip_ids.end());
    }
  } else {
    for (const auto& [clip, cls] : dvs::read_clip_classes(args.clips)) members[cls].push_back(clip);
  }
  std::map<std::string, std::vector<std::vector<float>>> per_class;
  for (const auto& [cls, ids] : members) {
    auto& vecs = per_class[cls];
    for (const auto& id : ids) {
      const auto* v = emb.find(id);
      if (!v) throw dvs::ValidationError("no embedding for clip " + id + " in " + args.emb);
      vecs.push_back(*v);
    }
  }
  const auto r = dvs::msd_report(per_class, cfg.matching.threads);
  ojson report;
  report["msd"]["per_class"] = r.per_class;
  report["msd"]["pair_counts"] = r.pair_counts;
  report["msd"]["mean_over_classes"] = r.mean_over_classes;
  ojson inputs = set_info(args.emb, emb);
  inputs["grouping"] = args.manifest.empty() ? args.clips : args.manifest;
  report["msd"]["inputs"] = std::move(inputs);
  emit_report(report, report_path(cfg, args.out, "msd"));
  return 0;
}

int metrics_ttest(const dvs::PipelineConfig& cfg, const MetricsArgs& args) {
  const auto r = dvs::welch_ttest(args.a, args.b);
  ojson report;
  report["ttest"]["t"] = r.t;
  report["ttest"]["df"] = r.df;
  report["ttest"]["p_two_sided"] = r.p_two_sided;
  report["ttest"]["inputs"]["a"] = args.a;
  report["ttest"]["inputs"]["b"] = args.b;
  emit_report(report, report_path(cfg, args.out, "ttest"));
  return 0;
}

// ---- fuse -----------------------------------------------------------------

int fuse_export(const dvs::PipelineConfig& cfg, const FuseArgs& args) {
  const auto mode = dvs::parse_fusion_mode(args.mode);
  if (!mode) throw dvs::ValidationError("--mode must be base, text or image");
  const auto manifest = dvs::load_manifest(or_default(args.manifest, cfg.paths.manifest));
  std::vector<std::string> classes;
  for (const auto& c : manifest.classes) classes.push_back(c.class_name);
  const auto table = dvs::build_label_table(classes, cfg.fusion.label_dim, cfg.fusion.seed);

  std::optional<dvs::EmbeddingSet> text, image;
  if (*mode == dvs::FusionMode::kText) {
    text = dvs::read_embeddings(or_default(args.text, embeddings_file(cfg, "text.emb")), dvs::Modality::kText);
  }
  if (*mode == dvs::FusionMode::kImage) {
    image = dvs::read_embeddings(or_default(args.image, embeddings_file(cfg, "frames.emb")), dvs::Modality::kImage);
  }
  const std::size_t count = dvs::export_conditioning(manifest, table, text ? &*text : nullptr,
                                                     image ? &*image : nullptr, *mode, args.out);
  if (!args.table_out.empty()) dvs::write_embeddings(dvs::label_table_set(table), args.table_out);

  ojson report;
  report["output"] = args.out;
  report["mode"] = args.mode;
  report["count"] = count;
  report["label_dim"] = table.label_dim;
  report["seed"] = table.seed;
  emit_report(report, "");
  return 0;
}

// ---- embed ----------------------------------------------------------------

dvs::Modality require_modality(const std::string& name) {
  auto m = dvs::parse_modality(name);
  if (!m || *m == dvs::Modality::kFused) throw dvs::ValidationError("--modality must be text, audio or image");
  return *m;
}

int embed_pack(const EmbedArgs& args) {
  const auto modality = require_modality(args.modality);
  std::istringstream in(dvs::read_file(args.input));
  std::vector<dvs::EmbeddingRecord> records;
  std::string line;
  std::size_t lineno = 0;
  std::optional<std::uint32_t> dim;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = args.input + ":" + std::to_string(lineno);
    const auto j = dvs::json_util::parse(line, where);
    dvs::EmbeddingRecord r;
    try {
      r.id = dvs::json_util::require_string(j, "id", "");
      const auto& values = dvs::json_util::require_array(j, "values", "");
      for (const auto& v : values) {
        if (!v.is_number()) throw dvs::ParseError("values: expected numbers");
        r.values.push_back(v.get<float>());
      }
    } catch (const dvs::ParseError& e) {
      throw dvs::ParseError(where + ": " + e.what());
    }
    if (!dim) dim = static_cast<std::uint32_t>(r.values.size());
    records.push_back(std::move(r));
  }
  if (!dim) throw dvs::ValidationError(args.input + ": no records; cannot infer dim");
  const dvs::EmbeddingSet set(modality, *dim, std::move(records));
  const std::size_t bytes = dvs::write_embeddings(set, args.out);
  ojson report;
  report["output"] = args.out;
  report["modality"] = args.modality;
  report["count"] = set.size();
  report["dim"] = set.dim();
  report["bytes"] = bytes;
  emit_report(report, "");
  return 0;
}

int embed_fetch(const EmbedArgs& args) {
  const auto modality = require_modality(args.modality);
  std::vector<dvs::ProviderItem> items;
  if (!args.taxonomy.empty()) {
    if (args.text_kind != "plain" && args.text_kind != "augmented") {
      throw dvs::ValidationError("--text-kind must be plain or augmented");
    }
    const auto t = dvs::load_taxonomy(args.taxonomy);
    for (const auto& c : t.classes) {
      for (const auto& s : c.subcategories) {
        items.push_back({dvs::subcategory_key(c.name, s.name),
                         args.text_kind == "plain" ? s.name : dvs::augment_subcategory_text(s), std::nullopt});
      }
    }
  } else {
    std::istringstream in(dvs::read_file(args.items));
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      const std::string where = args.items + ":" + std::to_string(lineno);
      const auto j = dvs::json_util::parse(line, where);
      dvs::ProviderItem item;
      item.id = dvs::json_util::require_string(j, "id", where);
      if (j.contains("text")) item.text = dvs::json_util::require_string(j, "text", where);
      if (j.contains("uri")) item.uri = dvs::json_util::require_string(j, "uri", where);
      if (!item.text == !item.uri) throw dvs::ParseError(where + ": item needs exactly one of text or uri");
      items.push_back(std::move(item));
    }
  }
  dvs::ProviderOptions options;
  options.batch_size = args.batch_size;
  options.parallelism = args.parallelism;
  dvs::EmbeddingProvider provider(args.provider, options);
  const auto set = provider.fetch(modality, items);
  const std::size_t bytes = dvs::write_embeddings(set, args.out);
  ojson report;
  report["output"] = args.out;
  report["modality"] = args.modality;
  report["count"] = set.size();
  report["dim"] = set.dim();
  report["model"] = provider.model(modality).value_or("");
  report["bytes"] = bytes;
  emit_report(report, "");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Diversity taxonomy, cross-modal matching and metrics toolkit"};
  app.require_subcommand(0, 1);
  GlobalArgs global;
  app.add_option("--config", global.config_path, "JSON pipeline config")->check(CLI::ExistingFile);
  app.add_option("--seed", global.seed, "Seed for frame sampling and the label table");
  app.add_flag("--print-config", global.print_config, "Print the effective config and exit");

  // taxonomy
  auto* tax = app.add_subcommand("taxonomy", "Build, validate or summarize a taxonomy");
  tax->require_subcommand(1);
  TaxonomyBuildArgs build_args;
  auto* tax_build = tax->add_subcommand("build", "Run the two-stage LLM taxonomy pipeline");
  tax_build->add_option("--labels", build_args.labels, "category<TAB>label file")->required();
  tax_build->add_option("--out", build_args.out, "Output taxonomy JSON");
  tax_build->add_option("--replay", build_args.replay, "Answer from recorded transcripts in this directory");
  tax_build->add_option("--record", build_args.record, "Record live transcripts into this directory");
  tax_build->add_option("--prompt-dir", build_args.prompt_dir, "Directory with cluster.txt and subcategorize.txt");
  tax_build->add_option("--base-url", build_args.base_url, "Chat API base URL");
  tax_build->add_option("--model", build_args.model, "Chat model id");
  tax_build->add_option("--parallelism", build_args.parallelism, "Concurrent categories");
  std::string tax_path;
  auto* tax_validate = tax->add_subcommand("validate", "Check taxonomy invariants");
  tax_validate->add_option("path", tax_path, "Taxonomy JSON");
  auto* tax_stats = tax->add_subcommand("stats", "Class and subcategory statistics");
  tax_stats->add_option("path", tax_path, "Taxonomy JSON");

  // match
  auto* match = app.add_subcommand("match", "Cross-modal matching");
  match->require_subcommand(1);
  MatchArgs match_args;
  auto* match_run_cmd = match->add_subcommand("run", "Assign clips to subcategories and write a manifest");
  match_run_cmd->add_option("--taxonomy", match_args.taxonomy);
  match_run_cmd->add_option("--clips", match_args.clips, "clip_id<TAB>class file");
  match_run_cmd->add_option("--audio", match_args.audio, "Audio embeddings (one per clip)");
  match_run_cmd->add_option("--frames", match_args.frames, "Frame embeddings ({clip}#frame{k})");
  match_run_cmd->add_option("--text", match_args.text, "Plain subcategory text embeddings");
  match_run_cmd->add_option("--text-augmented", match_args.text_augmented, "Adjective-augmented text embeddings");
  match_run_cmd->add_option("--out", match_args.out, "Manifest JSONL");
  match_run_cmd->add_option("--records", match_args.records, "Per-clip match records JSONL");
  match_run_cmd->add_option("--min-clips", match_args.min_clips);
  match_run_cmd->add_option("--softmax-scale", match_args.softmax_scale);
  match_run_cmd->add_option("--frame-agg", match_args.frame_agg)->check(CLI::IsMember({"mean", "max"}));
  match_run_cmd->add_option("--frames-per-clip", match_args.frames_per_clip, "0 uses every frame");
  match_run_cmd->add_flag("--keep-singleton-classes", match_args.keep_singleton_classes);
  match_run_cmd->add_option("--threads", match_args.threads);

  // metrics
  auto* metrics = app.add_subcommand("metrics", "Objective metrics");
  metrics->require_subcommand(1);
  MetricsArgs metrics_args;
  auto* fad = metrics->add_subcommand("fad", "Frechet distance between two embedding sets");
  fad->add_option("--real", metrics_args.real)->required();
  fad->add_option("--gen", metrics_args.gen)->required();
  fad->add_option("--out", metrics_args.out, "Also write the report here");
  auto* msd = metrics->add_subcommand("msd", "Per-class mean squared pairwise distance");
  msd->add_option("--emb", metrics_args.emb)->required();
  msd->add_option("--manifest", metrics_args.manifest, "Group clips by retained manifest classes");
  msd->add_option("--clips", metrics_args.clips, "Group clips by a clip_id<TAB>class file");
  msd->add_option("--out", metrics_args.out);
  auto* ttest = metrics->add_subcommand("ttest", "Welch t-test between two samples");
  ttest->add_option("--a", metrics_args.a, "Comma-separated values")->delimiter(',')->required();
  ttest->add_option("--b", metrics_args.b, "Comma-separated values")->delimiter(',')->required();
  ttest->add_option("--out", metrics_args.out);

  // fuse
  auto* fuse = app.add_subcommand("fuse", "Conditioning vectors");
  fuse->require_subcommand(1);
  FuseArgs fuse_args;
  auto* fuse_export_cmd = fuse->add_subcommand("export", "Write one fused vector per retained clip");
  fuse_export_cmd->add_option("--manifest", fuse_args.manifest);
  fuse_export_cmd->add_option("--mode", fuse_args.mode)->required()->check(CLI::IsMember({"base", "text", "image"}));
  fuse_export_cmd->add_option("--text", fuse_args.text, "Subcategory text embeddings (text mode)");
  fuse_export_cmd->add_option("--image", fuse_args.image, "Frame embeddings (image mode)");
  fuse_export_cmd->add_option("--out", fuse_args.out)->required();
  fuse_export_cmd->add_option("--label-dim", fuse_args.label_dim);
  fuse_export_cmd->add_option("--table-out", fuse_args.table_out, "Also write the label table");

  // embed
  auto* embed = app.add_subcommand("embed", "Embedding containers and provider access");
  embed->require_subcommand(1);
  EmbedArgs embed_args;
  auto* pack = embed->add_subcommand("pack", "Convert {id, values} JSONL into the binary container");
  pack->add_option("--input", embed_args.input)->required();
  pack->add_option("--modality", embed_args.modality)->required();
  pack->add_option("--out", embed_args.out)->required();
  auto* fetch = embed->add_subcommand("fetch", "Embed items through a provider service");
  fetch->add_option("--provider", embed_args.provider, "Provider base URL")->required();
  fetch->add_option("--modality", embed_args.modality)->required();
  auto* items_opt = fetch->add_option("--items", embed_args.items, "{id, text|uri} JSONL");
  auto* tax_opt = fetch->add_option("--taxonomy", embed_args.taxonomy, "Embed every subcategory text");
  items_opt->excludes(tax_opt);
  fetch->add_option("--text-kind", embed_args.text_kind, "plain or augmented (with --taxonomy)");
  fetch->add_option("--out", embed_args.out)->required();
  fetch->add_option("--batch-size", embed_args.batch_size);
  fetch->add_option("--parallelism", embed_args.parallelism);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(dvs::ExitCode::kValidation);
  }

  try {
    dvs::PipelineConfig cfg;
    if (!global.config_path.empty()) cfg = dvs::load_config(global.config_path);
    if (global.seed) {
      cfg.matching.seed = *global.seed;
      cfg.fusion.seed = *global.seed;
    }
    auto given = [](const CLI::App* cmd, const std::string& name) { return cmd->count(name) > 0; };
    if (tax_build->parsed()) {
      if (given(tax_build, "--base-url")) cfg.llm.base_url = build_args.base_url;
      if (given(tax_build, "--model")) cfg.llm.model = build_args.model;
      if (given(tax_build, "--parallelism")) cfg.llm.parallelism = build_args.parallelism;
      if (given(tax_build, "--replay")) cfg.llm.replay_dir = build_args.replay;
      if (given(tax_build, "--out")) cfg.paths.taxonomy = build_args.out;
    }
    if (match_run_cmd->parsed()) {
      if (given(match_run_cmd, "--min-clips")) cfg.matching.min_clips = match_args.min_clips;
      if (given(match_run_cmd, "--softmax-scale")) cfg.matching.softmax_scale = match_args.softmax_scale;
      if (given(match_run_cmd, "--frame-agg")) {
        cfg.matching.frame_agg = *dvs::parse_frame_aggregation(match_args.frame_agg);
      }
      if (given(match_run_cmd, "--frames-per-clip")) cfg.matching.frames_per_clip = match_args.frames_per_clip;
      if (match_args.keep_singleton_classes) cfg.matching.keep_singleton_classes = true;
      if (given(match_run_cmd, "--threads")) cfg.matching.threads = match_args.threads;
    }
    if (fuse_export_cmd->parsed() && given(fuse_export_cmd, "--label-dim")) {
      cfg.fusion.label_dim = fuse_args.label_dim;
    }
    dvs::validate_config(cfg);

    if (global.print_config) {
      std::cout << dvs::config_to_json(cfg).dump(2) << "\n";
      return 0;
    }
    if (tax_build->parsed()) return taxonomy_build(cfg, build_args);
    if (tax_validate->parsed()) return taxonomy_validate(or_default(tax_path, cfg.paths.taxonomy));
    if (tax_stats->parsed()) return taxonomy_stats(or_default(tax_path, cfg.paths.taxonomy));
    if (match_run_cmd->parsed()) return match_run(cfg, match_args);
    if (fad->parsed()) return metrics_fad(cfg, metrics_args);
    if (msd->parsed()) return metrics_msd(cfg, metrics_args);
    if (ttest->parsed()) return metrics_ttest(cfg, metrics_args);
    if (fuse_export_cmd->parsed()) return fuse_export(cfg, fuse_args);
    if (pack->parsed()) return embed_pack(embed_args);
    if (fetch->parsed()) return embed_fetch(embed_args);
    std::cout << app.help();
    return static_cast<int>(dvs::ExitCode::kValidation);
  } catch (const dvs::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(dvs::exit_code_for(e));
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(dvs::ExitCode::kIo);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(dvs::ExitCode::kValidation);
  }
}
