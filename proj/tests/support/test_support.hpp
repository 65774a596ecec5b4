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

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "dvs/chat_client.hpp"
#include "dvs/embedding_io.hpp"
#include "dvs/taxonomy.hpp"

namespace dvs::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// Small seeded generator for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : eng_(seed) {}
  std::uint64_t bits() { return eng_(); }
  std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(eng_); }
  std::int64_t range(std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(eng_);
  }
  double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
  double normal(double mean = 0.0, double sd = 1.0) { return std::normal_distribution<double>(mean, sd)(eng_); }
  bool coin(double p = 0.5) { return uniform() < p; }
  std::string word(std::size_t min_len = 1, std::size_t max_len = 10);
  std::vector<float> gaussian_vector(std::size_t d, double sd = 1.0);
  // Any finite float, with subnormals, zeros and extremes overrepresented.
  float any_finite_float();
  std::mt19937_64& engine() noexcept { return eng_; }

 private:
  std::mt19937_64 eng_;
};

std::vector<float> unit(std::vector<float> v);

// Clip/subcategory layout with well-separated modality centroids.
struct PlantedOptions {
  std::vector<std::size_t> subcategories_per_class = {2, 3, 2, 3};
  std::size_t clips_per_subcategory = 40;
  std::size_t frames_per_clip = 3;
  std::uint32_t dim = 32;
  double noise_sd = 0.05;
  std::uint64_t seed = 7;
};

struct PlantedFixture {
  Taxonomy taxonomy;
  EmbeddingSet audio{Modality::kAudio, 1};
  EmbeddingSet frames{Modality::kImage, 1};
  EmbeddingSet text{Modality::kText, 1};
  EmbeddingSet augmented_text{Modality::kText, 1};
  std::map<std::string, std::string> clip_classes;
  std::map<std::string, std::string> truth;  // clip id -> subcategory name
};

PlantedFixture make_planted(const PlantedOptions& options = {});

// Scripted chat responses for the replay fixture, keyed by the first line
// of the user message.
class ScriptedChat : public ChatBackend {
 public:
  explicit ScriptedChat(std::map<std::string, std::string> responses) : responses_(std::move(responses)) {}
  ChatReply complete(const ChatRequest& req) override;
  std::vector<ChatRequest> requests;

 private:
  std::map<std::string, std::string> responses_;
};

inline constexpr const char* kReplayTimestamp = "2026-01-01T00:00:00Z";
std::vector<SourceLabel> replay_fixture_labels();
std::map<std::string, std::string> replay_fixture_responses();
// Writes one transcript per request into dir and returns the hashes in call order.
std::vector<std::string> write_replay_fixture(const std::filesystem::path& dir);

std::filesystem::path fixture_dir();
std::filesystem::path dvs_binary();

}  // namespace dvs::testing
