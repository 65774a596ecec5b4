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

#include "dvs/matcher.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "dvs/error.hpp"
#include "dvs/io.hpp"

namespace dvs {

double cosine_similarity(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    throw DimensionError("cosine_similarity: dims " + std::to_string(a.size()) + " and " +
                         std::to_string(b.size()));
  }
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  na = std::sqrt(na);
  nb = std::sqrt(nb);
  if (na < kZeroNormEpsilon || nb < kZeroNormEpsilon) return 0.0;
  return std::clamp(dot / (na * nb), -1.0, 1.0);
}

std::string augment_subcategory_text(const Subcategory& s) {
  std::string out = s.name;
  for (const auto& adj : s.adjectives) {
    out += ", ";
    out += adj;
  }
  return out;
}

std::string subcategory_key(std::string_view class_name, std::string_view subcategory) {
  std::string key(class_name);
  key += '/';
  key += subcategory;
  return key;
}

namespace {

std::size_t argmax(const std::vector<double>& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

}  // namespace

FrameClassification classify_frames(std::span<const Vector> frames, std::span<const Vector> texts, double scale,
                                    FrameAggregation aggregation) {
  if (frames.empty()) throw ValidationError("classify_frames: need at least one frame");
  if (texts.size() < 2) throw ValidationError("classify_frames: need at least two candidate texts");
  if (!(scale > 0.0)) throw ValidationError("classify_frames: scale must be > 0");

  const std::size_t k = texts.size();
  std::vector<double> agg(k, 0.0);
  std::vector<double> logits(k);
  for (const auto& frame : frames) {
    for (std::size_t j = 0; j < k; ++j) logits[j] = scale * cosine_similarity(frame, texts[j]);
    const double top = *std::max_element(logits.begin(), logits.end());
    double z = 0.0;
    for (auto& l : logits) {
      l = std::exp(l - top);
      z += l;
    }
    for (std::size_t j = 0; j < k; ++j) {
      const double p = logits[j] / z;
      agg[j] = aggregation == FrameAggregation::kMean ? agg[j] + p : std::max(agg[j], p);
    }
  }
  double total = 0.0;
  if (aggregation == FrameAggregation::kMean) {
    for (auto& p : agg) p /= static_cast<double>(frames.size());
  } else {
    for (double p : agg) total += p;
    for (auto& p : agg) p /= total;
  }
  FrameClassification out;
  out.choice = argmax(agg);
  out.probabilities = std::move(agg);
  return out;
}

AudioClassification classify_audio(std::span<const float> audio, std::span<const Vector> texts) {
  if (texts.size() < 2) throw ValidationError("classify_audio: need at least two candidate texts");
  AudioClassification out;
  out.similarities.reserve(texts.size());
  for (const auto& t : texts) out.similarities.push_back(cosine_similarity(audio, t));
  out.choice = argmax(out.similarities);
  return out;
}

MatchRecord match_clip(const ClipBundle& bundle, const ClassTexts& texts, const MatchOptions& options) {
  if (texts.plain.size() != texts.augmented.size() || texts.plain.size() != texts.subcategory_names.size()) {
    throw ValidationError("match_clip: plain and augmented text lists must index the same subcategories");
  }
  std::vector<Vector> frames;
  frames.reserve(bundle.frames.size());
  for (const auto& f : bundle.frames) frames.push_back(f.values);

  MatchRecord r;
  r.clip_id = bundle.clip_id;
  auto image = classify_frames(frames, texts.plain, options.scale, options.aggregation);
  auto audio = classify_audio(bundle.audio, texts.augmented);
  r.image_choice = image.choice;
  r.image_probabilities = std::move(image.probabilities);
  r.audio_choice = audio.choice;
  r.agreed = r.image_choice == r.audio_choice;
  if (r.agreed) r.assigned = texts.subcategory_names[r.image_choice];
  return r;
}

Representative select_representative_image(std::span<const ClipBundle* const> clips, std::span<const float> text) {
  if (clips.empty()) throw ValidationError("select_representative_image: no assigned clips");
  const ClipFrame* best = nullptr;
  std::string best_id;
  double best_sim = 0.0;
  for (const ClipBundle* clip : clips) {
    for (const auto& f : clip->frames) {
      const double sim = cosine_similarity(f.values, text);
      std::string id = f.ref.id();
      if (!best || sim > best_sim || (sim == best_sim && id < best_id)) {
        best = &f;
        best_sim = sim;
        best_id = std::move(id);
      }
    }
  }
  if (!best) throw ValidationError("select_representative_image: assigned clips carry no frames");
  return {best->ref, best_sim};
}

Representative select_representative_image(std::span<const ClipBundle> clips, std::span<const float> text) {
  std::vector<const ClipBundle*> ptrs;
  ptrs.reserve(clips.size());
  for (const auto& c : clips) ptrs.push_back(&c);
  return select_representative_image(std::span<const ClipBundle* const>(ptrs), text);
}

DatasetManifest filter_subclasses(DatasetManifest manifest, const FilterOptions& options) {
  if (options.min_clips < 1) throw ValidationError("min_clips must be >= 1");
  std::vector<ManifestClass> kept_classes;
  for (auto& c : manifest.classes) {
    std::vector<ManifestSubcategory> kept;
    for (auto& s : c.subcategories) {
      if (s.clip_ids.size() < options.min_clips) {
        manifest.dropped_subcategories.push_back(
            {c.class_name, s.name, std::move(s.clip_ids), std::string(kDropBelowMinClips)});
      } else {
        kept.push_back(std::move(s));
      }
    }
    const bool too_few = kept.size() < 2 && (kept.empty() || !options.keep_singleton_classes);
    if (too_few) {
      for (auto& s : kept) {
        manifest.dropped_subcategories.push_back(
            {c.class_name, s.name, std::move(s.clip_ids), std::string(kDropTooFewSubcategories)});
      }
      continue;
    }
    c.subcategories = std::move(kept);
    kept_classes.push_back(std::move(c));
  }
  manifest.classes = std::move(kept_classes);
  return manifest;
}

namespace {

struct ClassPlan {
  const SoundClass* sound_class;
  ClassTexts texts;
};

const Vector& require_vector(const EmbeddingSet& set, const std::string& key, std::string_view what) {
  const Vector* v = set.find(key);
  if (!v) throw ValidationError(std::string(what) + " has no vector for " + key);
  return *v;
}

std::vector<ClipFrame> pick_frames(std::vector<ClipFrame> frames, const std::string& clip_id,
                                   const BuildOptions& options) {
  std::sort(frames.begin(), frames.end(),
            [](const ClipFrame& a, const ClipFrame& b) { return a.ref.frame_index < b.ref.frame_index; });
  if (options.frames_per_clip == 0 || frames.size() <= options.frames_per_clip) return frames;
  std::mt19937_64 rng(options.seed ^ fnv1a64(clip_id));
  std::vector<ClipFrame> picked;
  picked.reserve(options.frames_per_clip);
  std::sample(std::make_move_iterator(frames.begin()), std::make_move_iterator(frames.end()),
              std::back_inserter(picked), options.frames_per_clip, rng);
  return picked;
}

}  // namespace

BuildResult build_dataset(const Taxonomy& taxonomy, const EmbeddingSet& audio, const EmbeddingSet& frames,
                          const EmbeddingSet& text, const EmbeddingSet& augmented_text,
                          const std::map<std::string, std::string>& clip_classes, const BuildOptions& options) {
  if (audio.modality() != Modality::kAudio) throw ValidationError("audio set must have modality audio");
  if (frames.modality() != Modality::kImage) throw ValidationError("frame set must have modality image");
  if (text.modality() != Modality::kText || augmented_text.modality() != Modality::kText) {
    throw ValidationError("text sets must have modality text");
  }
  if (frames.dim() != text.dim()) {
    throw DimensionError("frame dim " + std::to_string(frames.dim()) + " differs from text dim " +
                         std::to_string(text.dim()));
  }
  if (audio.dim() != augmented_text.dim()) {
    throw DimensionError("audio dim " + std::to_string(audio.dim()) + " differs from augmented text dim " +
                         std::to_string(augmented_text.dim()));
  }

  std::map<std::string, ClassPlan> plans;
  for (const auto& c : taxonomy.classes) {
    if (c.subcategories.size() < 2) {
      throw ValidationError("class " + c.name + " has fewer than 2 subcategories; matching needs alternatives");
    }
    ClassPlan plan{&c, {}};
    for (const auto& s : c.subcategories) {
      const std::string key = subcategory_key(c.name, s.name);
      plan.texts.subcategory_names.push_back(s.name);
      plan.texts.plain.push_back(require_vector(text, key, "text set"));
      plan.texts.augmented.push_back(require_vector(augmented_text, key, "augmented text set"));
    }
    plans.emplace(c.name, std::move(plan));
  }

  std::unordered_map<std::string, std::vector<ClipFrame>> frames_by_clip;
  for (const auto& rec : frames.records()) {
    auto ref = FrameRef::parse(rec.id);
    if (!ref) throw ValidationError("frame id is not of the form {clip}#frame{k}: " + rec.id);
    if (!audio.contains(ref->clip_id)) continue;
    frames_by_clip[ref->clip_id].push_back({*ref, rec.values});
  }

  std::vector<ClipBundle> bundles;
  bundles.reserve(audio.size());
  for (const auto& rec : audio.records()) {
    auto cls = clip_classes.find(rec.id);
    if (cls == clip_classes.end()) throw ValidationError("clip " + rec.id + " has no class assignment");
    if (!plans.count(cls->second)) {
      throw ValidationError("clip " + rec.id + " belongs to class '" + cls->second + "' absent from the taxonomy");
    }
    auto fr = frames_by_clip.find(rec.id);
    if (fr == frames_by_clip.end()) throw ValidationError("clip " + rec.id + " has no frame embeddings");
    bundles.push_back({rec.id, cls->second, rec.values, pick_frames(std::move(fr->second), rec.id, options)});
  }
  std::sort(bundles.begin(), bundles.end(),
            [](const ClipBundle& a, const ClipBundle& b) { return a.clip_id < b.clip_id; });

  BuildResult result;
  result.records.resize(bundles.size());
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      result.records[i] = match_clip(bundles[i], plans.at(bundles[i].class_name).texts, options.match);
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(options.threads, 1, std::max<std::size_t>(1, bundles.size()));
  if (threads == 1) {
    work(0, bundles.size());
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (bundles.size() + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
      const std::size_t b = t * chunk;
      const std::size_t e = std::min(bundles.size(), b + chunk);
      if (b >= e) break;
      pool.emplace_back(work, b, e);
    }
    for (auto& th : pool) th.join();
  }

  // Group assigned clips per (class, subcategory); bundles are sorted so the
  // clip lists come out sorted too.
  std::map<std::string, std::vector<const ClipBundle*>> assigned;
  DatasetManifest& m = result.manifest;
  m.taxonomy_version = taxonomy.version;
  for (std::size_t i = 0; i < bundles.size(); ++i) {
    const auto& r = result.records[i];
    if (r.agreed) {
      assigned[subcategory_key(bundles[i].class_name, *r.assigned)].push_back(&bundles[i]);
    } else {
      m.unmatched_clips.push_back(bundles[i].clip_id);
    }
  }
  for (const auto& c : taxonomy.classes) {
    ManifestClass mc{c.name, {}};
    const ClassPlan& plan = plans.at(c.name);
    for (std::size_t s = 0; s < c.subcategories.size(); ++s) {
      ManifestSubcategory ms;
      ms.name = c.subcategories[s].name;
      auto it = assigned.find(subcategory_key(c.name, ms.name));
      if (it != assigned.end()) {
        for (const ClipBundle* b : it->second) ms.clip_ids.push_back(b->clip_id);
        const Representative rep =
            select_representative_image(std::span<const ClipBundle* const>(it->second), plan.texts.plain[s]);
        ms.representative_frame = rep.frame.id();
        ms.representative_similarity = rep.similarity;
      }
      mc.subcategories.push_back(std::move(ms));
    }
    m.classes.push_back(std::move(mc));
  }
  m = filter_subclasses(std::move(m), options.filter);
  return result;
}

std::map<std::string, std::string> read_clip_classes(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size()) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": expected 'clip_id<TAB>class_name'");
    }
    if (!out.emplace(line.substr(0, tab), line.substr(tab + 1)).second) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": duplicate clip id " + line.substr(0, tab));
    }
  }
  return out;
}

}  // namespace dvs
