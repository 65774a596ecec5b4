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

// Binary embedding container.
//
// Layout (little-endian):
//   magic     4 bytes  "DVSE"
//   version   u16      1 for text/audio/image, 2 for fused vectors
//   modality  u8       0 text, 1 audio, 2 image, 3 fused
//   dim       u32      >= 1
//   count     u64
//   count x { id_len u16, id bytes (UTF-8), dim x float32 }
//
// The reader requires the file to end exactly after the last record.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace dvs {

enum class Modality : std::uint8_t { kText = 0, kAudio = 1, kImage = 2, kFused = 3 };

std::string_view modality_name(Modality m) noexcept;
std::optional<Modality> parse_modality(std::string_view name) noexcept;

inline constexpr char kEmbeddingMagic[4] = {'D', 'V', 'S', 'E'};
inline constexpr std::size_t kEmbeddingHeaderSize = 19;
inline constexpr std::uint16_t kEmbeddingFormatV1 = 1;
inline constexpr std::uint16_t kEmbeddingFormatV2 = 2;

/// Format version a writer emits for `m`.
constexpr std::uint16_t format_version_for(Modality m) noexcept {
  return m == Modality::kFused ? kEmbeddingFormatV2 : kEmbeddingFormatV1;
}

struct EmbeddingRecord {
  std::string id;
  std::vector<float> values;
};

/// Immutable, dimension-tagged collection of vectors for one modality.
/// Construction checks that every vector has `dim` entries and that ids are
/// unique (ValidationError / DimensionError otherwise).
class EmbeddingSet {
 public:
  EmbeddingSet(Modality modality, std::uint32_t dim, std::vector<EmbeddingRecord> records = {});

  Modality modality() const noexcept { return modality_; }
  std::uint32_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }
  const std::vector<EmbeddingRecord>& records() const noexcept { return records_; }
  const EmbeddingRecord& operator[](std::size_t i) const { return records_[i]; }

  /// nullptr when absent.
  const std::vector<float>* find(std::string_view id) const;
  bool contains(std::string_view id) const { return find(id) != nullptr; }

  /// Bitwise equality of every float, plus modality/dim/ids in order.
  bool bit_equal(const EmbeddingSet& other) const noexcept;

 private:
  Modality modality_;
  std::uint32_t dim_;
  std::vector<EmbeddingRecord> records_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// A frame of a clip, identified as "{clip_id}#frame{frame_index}".
struct FrameRef {
  std::string clip_id;
  std::uint32_t frame_index = 0;

  std::string id() const { return clip_id + "#frame" + std::to_string(frame_index); }
  static std::optional<FrameRef> parse(std::string_view id);

  friend bool operator==(const FrameRef&, const FrameRef&) = default;
};

std::string encode_embeddings(const EmbeddingSet& set);

/// Decodes a container. When `expected` is set, a file tagged with another
/// modality is rejected. Throws FormatError / VersionError.
EmbeddingSet decode_embeddings(std::string_view bytes,
                               std::optional<Modality> expected = std::nullopt);

/// Atomic write; returns the number of bytes written.
std::size_t write_embeddings(const EmbeddingSet& set, const std::filesystem::path& path);
EmbeddingSet read_embeddings(const std::filesystem::path& path,
                             std::optional<Modality> expected = std::nullopt);

inline constexpr double kZeroNormEpsilon = 1e-12;

struct NormalizeResult {
  EmbeddingSet set;
  /// Ids of vectors whose norm was <= kZeroNormEpsilon; left unchanged.
  std::vector<std::string> zero_vector_ids;
};

NormalizeResult l2_normalize(const EmbeddingSet& set);

double l2_norm(std::span<const float> v) noexcept;

}  // namespace dvs
